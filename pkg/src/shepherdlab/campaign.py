"""Experiment campaigns: design runs, assessments and the results table."""

from __future__ import annotations

import csv
import io
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

from ._rng import RngStream, derive_seed
from .controllers import BUILTINS, load_controller, save_controller
from .errors import FormatError, InvalidArgument, InvalidConfig
from .missions import Mission, SheepVariant, build_scenario
from .optim import Budget, evolve, iterated_race
from .sim import evaluate_many

__all__ = [
    "AUTOMATIC_METHODS",
    "CSV_HEADER",
    "CampaignConfig",
    "Observation",
    "assess",
    "design",
    "read_observations",
    "run_campaign",
    "write_observations",
]

CSV_HEADER = ("method", "mission", "sheep", "design_idx", "seed", "objective", "sense")
AUTOMATIC_METHODS = ("pistacchio", "evocmy")
CONFIG_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Observation:
    method: str
    mission: str
    sheep: str
    design_idx: int
    seed: int
    objective: float
    sense: str

    def row(self):
        return [self.method, self.mission, self.sheep, self.design_idx, self.seed,
                repr(float(self.objective)), self.sense]


def write_observations(observations, path_or_file):
    """RFC-4180 CSV with the standard header."""
    own = not hasattr(path_or_file, "write")
    fh = open(path_or_file, "w", newline="", encoding="utf-8") if own else path_or_file
    try:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(CSV_HEADER)
        for o in observations:
            w.writerow(o.row())
    finally:
        if own:
            fh.close()


def read_observations(path_or_file):
    own = not hasattr(path_or_file, "read")
    fh = open(path_or_file, newline="", encoding="utf-8") if own else path_or_file
    try:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise FormatError(f"expected CSV header {','.join(CSV_HEADER)}")
        out = []
        for line, r in enumerate(reader, start=2):
            try:
                out.append(Observation(r["method"], r["mission"], r["sheep"], int(r["design_idx"]),
                                       int(r["seed"]), float(r["objective"]), r["sense"]))
            except (TypeError, ValueError) as exc:
                raise FormatError(f"line {line}: {exc}") from exc
        return out
    finally:
        if own:
            fh.close()


def design(method, scenario, budget, seed, threads=1):
    """One design run; returns a DesignOutcome."""
    rng = RngStream(seed)
    b = Budget(budget)
    if method == "pistacchio":
        return iterated_race(scenario, b, rng, threads=threads, return_outcome=True)
    if method == "evocmy":
        return evolve(scenario, b, rng, threads=threads, return_outcome=True)
    raise InvalidArgument(f"unknown design method {method!r}")


def assessment_seed(seed, index):
    return derive_seed(seed, "assessment", index)


def assess(controller, scenario, n, seed, start=0, threads=1):
    """``n`` episodes with seeds derived from ``(seed, start + i)``."""
    if n < 0:
        raise InvalidArgument("n must be non-negative")
    seeds = [assessment_seed(seed, start + i) for i in range(n)]
    return evaluate_many(scenario, controller, seeds, threads)


@dataclass
class CampaignConfig:
    """What to run and where to write it.

    Fixed controllers (built-ins and files) get
    ``designs_per_scenario * assessments_per_design`` assessments each so
    every method contributes the same number of observations per scenario.
    """

    methods: list
    scenarios: list = field(default_factory=lambda: [(m.value, v.value) for m in Mission for v in SheepVariant])
    budget: int = 100_000
    designs_per_scenario: int = 10
    assessments_per_design: int = 1
    master_seed: int = 0
    output_dir: str = "campaign"
    threads: int = 1
    controller_files: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.methods:
            raise InvalidConfig("at least one method is required")
        if len(set(self.methods)) != len(self.methods):
            raise InvalidConfig("duplicate method")
        for m in self.methods:
            if m not in AUTOMATIC_METHODS and m not in BUILTINS and m not in self.controller_files:
                raise InvalidConfig(f"unknown method {m!r}")
        if not self.scenarios:
            raise InvalidConfig("at least one scenario is required")
        try:
            self.scenarios = [(Mission.parse(a).value, SheepVariant.parse(b).value) for a, b in self.scenarios]
        except (InvalidArgument, TypeError, ValueError) as exc:
            raise InvalidConfig(f"bad scenario list: {exc}") from exc
        for name, value in (("designs_per_scenario", self.designs_per_scenario),
                            ("assessments_per_design", self.assessments_per_design),
                            ("threads", self.threads)):
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise InvalidConfig(f"{name} must be a positive integer")
        if any(m in AUTOMATIC_METHODS for m in self.methods) and self.budget < 1000:
            raise InvalidConfig("design budget must be at least 1000 episodes")
        if isinstance(self.master_seed, bool) or not isinstance(self.master_seed, int):
            raise InvalidConfig("master_seed must be an integer")

    @property
    def replicates(self):
        return self.designs_per_scenario * self.assessments_per_design

    def to_dict(self):
        return {
            "format_version": CONFIG_FORMAT_VERSION,
            "methods": list(self.methods),
            "scenarios": [list(s) for s in self.scenarios],
            "budget": self.budget,
            "designs_per_scenario": self.designs_per_scenario,
            "assessments_per_design": self.assessments_per_design,
            "master_seed": self.master_seed,
            "output_dir": str(self.output_dir),
            "threads": self.threads,
            "controller_files": dict(self.controller_files),
        }

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise InvalidConfig("config must be a JSON object")
        if doc.get("format_version") != CONFIG_FORMAT_VERSION:
            raise InvalidConfig(f"unsupported config format_version {doc.get('format_version')!r}")
        known = set(cls.__dataclass_fields__)
        extra = set(doc) - known - {"format_version"}
        if extra:
            raise InvalidConfig(f"unknown config keys {sorted(extra)}")
        args = {k: v for k, v in doc.items() if k in known}
        if "methods" not in args:
            raise InvalidConfig("config needs 'methods'")
        try:
            return cls(**args)
        except TypeError as exc:
            raise InvalidConfig(str(exc)) from exc

    @classmethod
    def load(cls, path):
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"{path}: not valid JSON ({exc})") from exc
        return cls.from_dict(doc)


def _atomic_write(path, text):
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _design_cell(config, method, scenario, d, out, log):
    """Load design ``d`` if it was completed earlier, else run and save it."""
    ctl_path = out / "designs" / method / scenario.name / f"design_{d:03d}.json"
    man_path = ctl_path.with_name(f"design_{d:03d}.manifest.json")
    if ctl_path.exists() and man_path.exists():
        return load_controller(str(ctl_path))
    ctl_path.parent.mkdir(parents=True, exist_ok=True)
    seed = derive_seed(config.master_seed, "design", method, scenario.mission.value,
                       scenario.sheep_variant.value, d)
    t0 = time.perf_counter()
    outcome = design(method, scenario, config.budget, seed, config.threads)
    manifest = {
        "format_version": CONFIG_FORMAT_VERSION,
        "method": method,
        "mission": scenario.mission.value,
        "sheep": scenario.sheep_variant.value,
        "design_idx": d,
        "seed": seed,
        "budget": config.budget,
        "consumed": outcome.consumed,
        "best_score": outcome.best_score,
        "history": outcome.history,
        "controller_file": ctl_path.name,
    }
    save_controller(outcome.best, ctl_path.with_suffix(".tmp"))
    os.replace(ctl_path.with_suffix(".tmp"), ctl_path)
    _atomic_write(man_path, json.dumps(manifest, indent=2) + "\n")
    if log:
        log(f"designed {method} {scenario.name} #{d} in {time.perf_counter() - t0:.1f}s "
            f"(score {outcome.best_score:.4g}, {outcome.consumed} episodes)")
    return outcome.best


def run_campaign(config, log=None):
    """Run every (scenario, method) cell and write ``observations.csv``.

    Assessment seeds depend only on the scenario and the replicate index, so
    all methods are assessed on the same episodes; design seeds come from a
    separate label. Completed designs found on disk are reused, so an
    interrupted campaign resumes and a finished one reproduces its files.
    Returns the observations.
    """
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    _atomic_write(out / "config.json", json.dumps(config.to_dict(), indent=2) + "\n")
    obs = []
    for mission, sheep in config.scenarios:
        scenario = build_scenario(mission, sheep)
        base = derive_seed(config.master_seed, "assess", mission, sheep)
        for method in config.methods:
            if method in AUTOMATIC_METHODS:
                for d in range(config.designs_per_scenario):
                    ctl = _design_cell(config, method, scenario, d, out, log)
                    start = d * config.assessments_per_design
                    results = assess(ctl, scenario, config.assessments_per_design, base, start,
                                     config.threads)
                    obs += [Observation(method, mission, sheep, d, r.seed, r.objective,
                                        scenario.sense.value) for r in results]
            else:
                ctl = load_controller(config.controller_files.get(method, method))
                results = assess(ctl, scenario, config.replicates, base, 0, config.threads)
                obs += [Observation(method, mission, sheep, 0, r.seed, r.objective,
                                    scenario.sense.value) for r in results]
    buf = io.StringIO()
    write_observations(obs, buf)
    _atomic_write(out / "observations.csv", buf.getvalue())
    return obs
