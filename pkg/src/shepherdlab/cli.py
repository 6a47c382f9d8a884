"""Command-line entry point.

Exit codes: 0 success, 2 invalid configuration or input, 3 budget or I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import campaign as camp
from .controllers import load_controller, save_controller
from .errors import BudgetExhausted, FormatError, InvalidArgument, InvalidConfig, InvalidInput
from .missions import build_scenario
from .sim import run_episode, write_trace_csv
from .stats import friedman_rank_summary
from .validation import check_seed

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3

log = logging.getLogger("shepherdlab")


def _scenario_args(p):
    p.add_argument("--mission", required=True, choices=["aggregation", "dispersion", "herding"])
    p.add_argument("--sheep", required=True, choices=["c1", "c2", "c3"])


def _parser():
    ap = argparse.ArgumentParser(prog="shepherdlab", description="Shepherd controller design workbench")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="run one automatic design")
    p.add_argument("--method", required=True, choices=list(camp.AUTOMATIC_METHODS))
    _scenario_args(p)
    p.add_argument("--budget", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("assess", help="assess a controller file or built-in")
    p.add_argument("--controller", required=True, help="JSON file or built-in name (rwalk, idle)")
    _scenario_args(p)
    p.add_argument("-n", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", default=None, help="method label for the CSV rows")
    p.add_argument("--out", default=None, help="CSV file (default: stdout)")
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("stats", help="rank methods from an observations CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--alpha", type=float, default=0.05)

    p = sub.add_parser("trace", help="write a per-cycle trace of one episode")
    p.add_argument("--controller", required=True)
    _scenario_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("campaign", help="run a full campaign from a JSON config")
    p.add_argument("--config", required=True)
    return ap


def _method_label(source, controller):
    if isinstance(source, str) and source in ("rwalk", "idle"):
        return source
    return Path(source).stem


def cmd_design(a):
    scenario = build_scenario(a.mission, a.sheep)
    if a.budget < 1000:
        raise InvalidConfig("design budget must be at least 1000 episodes")
    if a.threads < 1:
        raise InvalidConfig("threads must be positive")
    outcome = camp.design(a.method, scenario, a.budget, check_seed(a.seed), a.threads)
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    save_controller(outcome.best, out / "controller.json")
    manifest = {
        "format_version": 1, "method": a.method, "mission": a.mission, "sheep": a.sheep,
        "budget": a.budget, "consumed": outcome.consumed, "seed": a.seed,
        "best_score": outcome.best_score, "history": outcome.history,
        "controller_file": "controller.json",
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    print(f"{a.method} {scenario.name}: best score {outcome.best_score:.6g} "
          f"after {outcome.consumed} episodes -> {out / 'controller.json'}")


def cmd_assess(a):
    if a.n < 0:
        raise InvalidConfig("-n must be non-negative")
    scenario = build_scenario(a.mission, a.sheep)
    ctl = load_controller(a.controller)
    method = a.method or _method_label(a.controller, ctl)
    results = camp.assess(ctl, scenario, a.n, check_seed(a.seed), threads=max(1, a.threads))
    obs = [camp.Observation(method, a.mission, a.sheep, 0, r.seed, r.objective, scenario.sense.value)
           for r in results]
    if a.out:
        camp.write_observations(obs, a.out)
    else:
        camp.write_observations(obs, sys.stdout)


def cmd_stats(a):
    obs = camp.read_observations(a.input)
    print(friedman_rank_summary(obs, a.alpha).format())


def cmd_trace(a):
    scenario = build_scenario(a.mission, a.sheep)
    ctl = load_controller(a.controller)
    result, trace = run_episode(scenario, ctl, check_seed(a.seed), trace=True)
    write_trace_csv(trace, a.out)
    print(f"objective {result.objective!r} ({trace.shape[0] - 1} cycles) -> {a.out}")


def cmd_campaign(a):
    config = camp.CampaignConfig.load(a.config)
    obs = camp.run_campaign(config, log=log.info)
    print(f"{len(obs)} observations -> {Path(config.output_dir) / 'observations.csv'}")


COMMANDS = {"design": cmd_design, "assess": cmd_assess, "stats": cmd_stats,
            "trace": cmd_trace, "campaign": cmd_campaign}


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(message)s")
    try:
        COMMANDS[args.command](args)
    except (InvalidConfig, InvalidArgument, InvalidInput, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BudgetExhausted, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
