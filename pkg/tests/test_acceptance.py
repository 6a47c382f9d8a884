"""Acceptance checks; ``conftest.py`` prints one PASS/FAIL line per criterion."""

import ast
import hashlib
import math
import os
import time
from pathlib import Path

import numpy as np
import pytest

import shepherdlab
from conftest import make_world, polar
from shepherdlab._rng import RngStream
from shepherdlab.campaign import CampaignConfig, run_campaign
from shepherdlab.core import Pose
from shepherdlab.missions import all_scenarios, build_scenario, f1_centroid_spread, f2_sheep_outside, herding_regions
from shepherdlab.nn import N_INPUTS, N_OUTPUTS, N_WEIGHTS, NnGenome, encode_inputs, forward
from shepherdlab.optim import Budget, Evaluator, evolve, iterated_race
from shepherdlab.pfsm import mutate_pfsm, sample_pfsm
from shepherdlab.rm3 import CAMERA_RANGE, Actuation, MAX_SPEED, PROX_ANGLES, PROX_RANGE, SensorReadings, sense_camera, sense_proximity
from shepherdlab.sim import init_episode, run_episode, step
from shepherdlab.controllers import Idle
from shepherdlab.stats import friedman_eliminate, friedman_rank_summary, friedman_test

R = 0.035


def report(name, **values):
    print(f"[{name}] " + ", ".join(f"{k}={v}" for k, v in values.items()))


def test_criterion_1_objective_oracles():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    regions = herding_regions()
    worst = 0.0
    for _ in range(1000):
        p = rng.uniform(-1.2, 1.2, (10, 2))
        cx = sum(x for x, _ in p) / 10
        cy = sum(y for _, y in p) / 10
        ref = sum(math.sqrt((x - cx) ** 2 + (y - cy) ** 2) for x, y in p) / 10
        worst = max(worst, abs(f1_centroid_spread(p) - ref))
        inside = sum(1 for x, y in p if any((x - r.center[0]) ** 2 + (y - r.center[1]) ** 2 <= r.radius ** 2
                                            for r in regions))
        assert f2_sheep_outside(p, regions) == 10 - inside
    assert worst <= 1e-12
    assert f1_centroid_spread([(0.2, 0.4)] * 10) == 0.0
    assert f1_centroid_spread([(-0.5, 0.0)] * 5 + [(0.5, 0.0)] * 5) == 0.5
    assert f1_centroid_spread([(0.0, -1.0)] * 5 + [(0.0, 1.0)] * 5) == 1.0
    elapsed = time.perf_counter() - t0
    report("1", max_f1_error=worst, seconds=round(elapsed, 3))
    assert elapsed < 1.0


def test_criterion_2_rm3_conformance():
    assert (N_INPUTS, N_OUTPUTS, N_WEIGHTS) == (24, 8, 192)
    assert len(encode_inputs(SensorReadings.seeing())) == 24
    rng = RngStream(2)
    top = 0.0
    for _ in range(2000):
        g = NnGenome.random(rng)
        inputs = np.array([rng.random() for _ in range(24)])
        act = forward(g, inputs)
        top = max(top, abs(act.v_left), abs(act.v_right))
    assert top <= MAX_SPEED
    s1 = PROX_ANGLES[0]
    pair = lambda d: make_world([(0, 0, 0), polar((0, 0), s1, d)], leds=["none", "none"])
    assert sense_proximity(pair(2 * R + PROX_RANGE), 0)[0] == 0.0
    assert sense_proximity(pair(2 * R + PROX_RANGE - 1e-6), 0)[0] > 0.0
    cam = lambda d: make_world([(0, 0, 0), polar((0, 0), 0.3, d)], leds=["none", "magenta"])
    assert sense_camera(cam(CAMERA_RANGE), 0)[0][1] is True
    assert sense_camera(cam(CAMERA_RANGE + 1e-9), 0)[0][1] is False
    report("2", inputs=N_INPUTS, outputs=N_OUTPUTS, weights=N_WEIGHTS, max_speed=top,
           camera_range=CAMERA_RANGE, prox_range=PROX_RANGE)


def test_criterion_3_pfsm_structure():
    t0 = time.perf_counter()
    rng = RngStream(3)

    def valid(cfg):
        return 1 <= cfg.n_states <= 4 and all(
            len(out) <= 4 and all(t.target != s for t in out) for s, out in enumerate(cfg.transitions))

    sampled = [sample_pfsm(rng) for _ in range(10_000)]
    assert all(valid(c) for c in sampled)
    cur = sampled[0]
    bad = 0
    for k in range(10_000):
        cur = mutate_pfsm(cur if k % 50 else sampled[k], rng)
        bad += not valid(cur)
    elapsed = time.perf_counter() - t0
    report("3", invalid=bad, seconds=round(elapsed, 3))
    assert bad == 0
    assert elapsed < 5.0


def test_criterion_4_passivity_and_capture():
    moved = 0
    for seed in range(100):
        sc = build_scenario(("aggregation", "dispersion", "herding")[seed % 3], f"c{seed % 3 + 1}").replace(n_shepherds=0)
        start = init_episode(sc, seed).sheep_positions
        res = run_episode(sc, Idle(), seed)
        moved += not np.array_equal(np.array(res.final_sheep_positions), start)
    assert moved == 0
    # capture: a shepherd rams a sheep into a goal region; it must halt and stay dark
    sc = build_scenario("herding", "c1")
    region = sc.arena.white_regions()[0]
    cx, cy = region.center
    u = -np.array(region.center) / math.hypot(cx, cy)
    edge = np.array(region.center) + u * (region.radius + 0.05)
    heading = math.atan2(-u[1], -u[0])
    sheep = Pose(edge[0], edge[1], 0.0)
    shepherd = Pose(edge[0] + u[0] * (2 * R + 0.002), edge[1] + u[1] * (2 * R + 0.002), heading)
    w = make_world([shepherd, sheep], leds=["none", "yellow"], mission="herding", sheep="c1")
    halted_at = None
    for t in range(sc.duration):
        step(w, _forward)
        if w.halted[1] and halted_at is None:
            halted_at = t
            frozen = w.pos[1].copy()
        if halted_at is not None:
            assert w.halted[1] and w.led[1] == 0
            assert np.array_equal(w.pos[1], frozen)
    report("4", seeds_moved=moved, halted_at_cycle=halted_at)
    assert halted_at is not None


def _forward(readings, memory, rng):
    return Actuation(MAX_SPEED, MAX_SPEED)


def test_criterion_5_determinism(tmp_path):
    sc = build_scenario("herding", "c3")
    ctl = sample_pfsm(RngStream(55))
    a, b = run_episode(sc, ctl, 77), run_episode(sc, ctl, 77)
    assert a.to_json() == b.to_json()
    g = NnGenome.random(RngStream(5))
    assert run_episode(sc, g, 8).to_json() == run_episode(sc, g, 8).to_json()
    csvs = []
    for name, threads in (("a", 1), ("b", 1), ("c", 4)):
        cfg = CampaignConfig(methods=["evocmy", "rwalk"], scenarios=[("aggregation", "c2")], budget=1000,
                             designs_per_scenario=1, assessments_per_design=3, master_seed=5,
                             output_dir=str(tmp_path / name), threads=threads)
        run_campaign(cfg)
        csvs.append((tmp_path / name / "observations.csv").read_bytes())
    identical = csvs[0] == csvs[1] == csvs[2]
    report("5", episode_identical=a == b, csv_identical=identical)
    assert identical


def test_criterion_6_budget_exactness():
    sc = build_scenario("aggregation", "c1").replace(duration=40)
    counts = {}
    for name, algo in (("race", iterated_race), ("evolve", evolve)):
        calls = []

        def fn(ctl, seed):
            calls.append(seed)
            return run_episode(sc, ctl, seed).objective

        b = Budget(2000)
        algo(sc, b, RngStream(6), evaluator=Evaluator(sc, b, episode_fn=fn))
        counts[name] = (len(calls), b.consumed)
        assert len(calls) == b.consumed <= 2000
    report("6", **{k: v[0] for k, v in counts.items()})


def _source_key():
    h = hashlib.sha256()
    for path in sorted(Path(shepherdlab.__file__).parent.glob("*.py")):
        h.update(path.name.encode())
        h.update(ast.dump(ast.parse(path.read_text())).encode())
    return h.hexdigest()[:16]


CAMPAIGN_DIR = Path(os.environ.get("SHEPHERDLAB_CACHE", Path(__file__).resolve().parent.parent / ".campaign_cache"))


@pytest.mark.slow
def test_criterion_7_ordinal_reproduction():
    cfg = CampaignConfig(methods=["pistacchio", "evocmy", "rwalk"], budget=5000, designs_per_scenario=3,
                         assessments_per_design=10, master_seed=2024,
                         output_dir=str(CAMPAIGN_DIR / _source_key()))
    obs = run_campaign(cfg, log=print)
    wins = {"pistacchio": 0, "evocmy": 0}
    for sc in all_scenarios():
        med = {}
        for m in cfg.methods:
            vals = [o.objective for o in obs if o.method == m and o.mission == sc.mission.value
                    and o.sheep == sc.sheep_variant.value]
            assert len(vals) == 30
            med[m] = float(np.median(vals)) * sc.sense.sign()
        for m in wins:
            wins[m] += med[m] < med["rwalk"]
        print(f"{sc.name}: " + ", ".join(f"{m}={med[m] * sc.sense.sign():.4g}" for m in cfg.methods))
    summary = friedman_rank_summary(obs)
    print(summary.format())
    last = summary.ranking()[-1] == "rwalk"
    separated = all(summary.disjoint("rwalk", m) for m in wins)
    report("7", wins_pistacchio=wins["pistacchio"], wins_evocmy=wins["evocmy"], rwalk_last=last,
           disjoint=separated)
    assert wins["pistacchio"] >= 7 and wins["evocmy"] >= 7
    assert last and separated


def test_criterion_8_friedman_check():
    ordered = np.tile([1.0, 2.0, 3.0], (10, 1))
    res = friedman_test(ordered, 0.05)
    assert res.statistic == pytest.approx(20.0, abs=1e-12)
    assert res.p_value < 0.05
    assert friedman_eliminate(ordered.T) != [0, 1, 2]
    flat = friedman_test(np.ones((10, 3)), 0.05)
    assert flat.statistic == 0.0
    assert friedman_eliminate(np.ones((3, 10))) == [0, 1, 2]
    report("8", ordered_statistic=res.statistic, p=res.p_value, flat_statistic=flat.statistic)
