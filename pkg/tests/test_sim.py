import csv
import math

import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from conftest import make_world
from shepherdlab.controllers import Idle
from shepherdlab.core import ColorSignal, Pose
from shepherdlab.errors import ControllerFault, InvalidArgument, PlacementInfeasible
from shepherdlab.missions import build_scenario, f2_sheep_outside, herding_regions
from shepherdlab.nn import NnGenome
from shepherdlab.pfsm import PfsmConfig, RandomWalk, sample_pfsm
from shepherdlab.rm3 import Actuation
from shepherdlab._rng import RngStream
from shepherdlab.sim import (
    WorldState,
    init_episode,
    resolve_collisions,
    run_episode,
    step,
    write_trace_csv,
)

R = 0.035
AXLE = 0.053


def constant(vl, vr, led="none"):
    def ctl(readings, memory, rng):
        return Actuation(vl, vr, led)
    return ctl


def inside(world, margin=0.0):
    a = world.arena
    return np.all(world.pos @ a.normals.T <= a.offsets + margin + 1e-9, axis=1)


def min_gap(world):
    p = world.pos
    d = np.hypot(*(p[:, None, :] - p[None, :, :]).transpose(2, 0, 1))
    np.fill_diagonal(d, np.inf)
    return d.min()


class TestPlacement:
    @pytest.mark.parametrize("seed", range(20))
    def test_aggregation_whole_arena(self, seed):
        w = init_episode(build_scenario("aggregation", "c1"), seed)
        assert w.pos.shape == (15, 2)
        assert inside(w, margin=-R).all()
        assert min_gap(w) > 2 * R
        assert np.all((w.heading >= 0) & (w.heading < 2 * math.pi))
        assert list(w.led[:5]) == [0] * 5 and list(w.led[5:]) == [int(ColorSignal.YELLOW)] * 10

    @pytest.mark.parametrize("mission", ["dispersion", "herding"])
    def test_central_disk_over_100_seeds(self, mission):
        sc = build_scenario(mission, "c2")
        r = max(np.hypot(*init_episode(sc, s).pos.T).max() for s in range(100))
        assert r <= 0.60

    def test_herding_starts_outside_goal(self):
        sc = build_scenario("herding", "c3")
        for s in range(30):
            assert f2_sheep_outside(init_episode(sc, s).sheep_positions, herding_regions()) == 10

    def test_same_seed_same_placement(self):
        sc = build_scenario("dispersion", "c1")
        a, b = init_episode(sc, 77), init_episode(sc, 77)
        assert np.array_equal(a.pos, b.pos) and np.array_equal(a.heading, b.heading)
        assert not np.array_equal(a.pos, init_episode(sc, 78).pos)

    def test_infeasible_placement(self):
        sc = build_scenario("dispersion", "c1").replace(placement_radius=0.1)
        with pytest.raises(PlacementInfeasible):
            init_episode(sc, 0)


class TestKinematics:
    def test_straight_line(self):
        w = make_world([(0, 0, 0.3), (0.5, 0.5, 0)])
        step(w, constant(0.12, 0.12))
        assert w.pos[0] == pytest.approx([0.012 * math.cos(0.3), 0.012 * math.sin(0.3)], abs=1e-12)
        assert w.tick == 1

    def test_pure_rotation(self):
        w = make_world([(0, 0, 1.0), (0.5, 0.5, 0)])
        step(w, constant(-0.05, 0.05))
        assert w.pos[0] == pytest.approx([0.0, 0.0], abs=1e-15)
        assert w.heading[0] == pytest.approx(1.0 + 2 * 0.05 / AXLE * 0.1, abs=1e-12)

    def test_actuation_clamped(self):
        w = make_world([(0, 0, 0), (0.5, 0.5, 0)])
        step(w, constant(5.0, 5.0))
        assert w.pos[0, 0] == pytest.approx(0.012)

    def test_led_applied(self):
        w = make_world([(0, 0, 0), (0.5, 0.5, 0)])
        step(w, constant(0, 0, "cyan"))
        assert w.led[0] == int(ColorSignal.CYAN)

    def test_wall_slide(self):
        a = build_scenario("aggregation", "c1").arena
        n = a.normals[0]
        c = float(a.offsets[0]) - R - 0.001
        t = np.array([-n[1], n[0]])
        heading = math.atan2(n[1] + t[1], n[0] + t[0])  # 45 degrees into the wall
        w = make_world([(c * n[0], c * n[1], heading), (0, 0, 0)])
        before = w.pos[0].copy()
        for _ in range(5):
            step(w, constant(0.12, 0.12))
        assert inside(w, margin=-R).all()
        assert np.dot(w.pos[0] - before, t) > 0.03

    def test_finished_episode_rejects_step(self):
        w = make_world([(0, 0, 0), (0.5, 0.5, 0)])
        w.tick = w.scenario.duration
        with pytest.raises(InvalidArgument):
            step(w, Idle())


class TestCollisions:
    def test_symmetric_push(self):
        w = make_world([(0, 0, 0), (2 * R - 0.01, 0, 0)])
        resolve_collisions(w)
        assert w.pos[0] == pytest.approx([-0.005, 0], abs=1e-9)
        assert w.pos[1] == pytest.approx([2 * R - 0.005, 0], abs=1e-9)

    def test_projected_back_from_wall(self):
        a = build_scenario("aggregation", "c1").arena
        n = a.normals[2]
        c = float(a.offsets[2]) - R + 0.01
        w = make_world([(c * n[0], c * n[1], 0), (0, 0, 0)])
        resolve_collisions(w)
        assert float(w.pos[0] @ n) == pytest.approx(float(a.offsets[2]) - R, abs=1e-9)

    def test_fixed_point(self):
        w = init_episode(build_scenario("aggregation", "c2"), 3)
        before = w.pos.copy()
        resolve_collisions(w)
        assert np.array_equal(before, w.pos)


class TestEpisode:
    def test_deterministic(self):
        sc = build_scenario("herding", "c3")
        ctl = sample_pfsm(RngStream(4))
        a, b = run_episode(sc, ctl, 12345), run_episode(sc, ctl, 12345)
        assert a == b and a.to_json() == b.to_json()

    @pytest.mark.parametrize("mission", ["aggregation", "dispersion", "herding"])
    def test_passive_shepherds_leave_sheep_in_place(self, mission):
        sc = build_scenario(mission, "c3")
        start = init_episode(sc, 9).sheep_positions
        res = run_episode(sc, Idle(), 9)
        assert np.allclose(np.array(res.final_sheep_positions), start, atol=0.0)

    def test_sheep_starting_in_goal_score_zero(self):
        sc = build_scenario("herding", "c1").replace(duration=20)
        w = init_episode(sc, 0)
        centers = [rg.center for rg in sc.arena.white_regions()]
        poses = [Pose(*p, h) for p, h in zip(w.pos[:5], w.heading[:5])]
        for k in range(10):
            cx, cy = centers[k % 4]
            ang = (k // 4) * 2.1
            poses.append(Pose(cx + 0.1 * math.cos(ang), cy + 0.1 * math.sin(ang), 0.0))
        fixture = WorldState.build(sc, poses)
        for _ in range(sc.duration):
            step(fixture, RandomWalk())
        assert sc.objective(fixture.sheep_positions) == 0
        assert fixture.halted[5:].all()

    def test_kernel_and_python_paths_agree(self):
        sc = build_scenario("dispersion", "c3").replace(duration=60)
        w1 = init_episode(sc, 5)
        w2 = w1.copy()
        for _ in range(sc.duration):
            step(w1, Idle())
            step(w2, constant(0.0, 0.0))
        assert np.array_equal(w1.pos, w2.pos) and np.array_equal(w1.led, w2.led)

    def test_fault_gives_worst_objective(self):
        bad = NnGenome(np.full(192, 5.0))
        for mission, worst in [("dispersion", 0.0), ("herding", 10)]:
            sc = build_scenario(mission, "c1")
            r = run_episode(sc, constant(float("inf"), 0.0), 1)
            assert r.faulted and r.objective == worst
        sc = build_scenario("aggregation", "c1")
        r = run_episode(sc, constant(float("nan"), 0.0), 1)
        assert r.faulted and r.objective == pytest.approx(sc.arena.diameter)
        assert not run_episode(sc, bad, 1).faulted

    def test_step_raises_fault(self):
        w = make_world([(0, 0, 0), (0.5, 0.5, 0)])
        with pytest.raises(ControllerFault):
            step(w, constant(float("nan"), 0.0))


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 2**63 - 1), st.sampled_from(["aggregation", "dispersion", "herding"]),
       st.sampled_from(["c1", "c2", "c3"]), st.sampled_from(["rwalk", "pfsm", "nn"]))
@example(seed=72, mission="aggregation", sheep="c1", kind="nn")  # dense cluster against a wall
def test_episode_invariants(seed, mission, sheep, kind):
    sc = build_scenario(mission, sheep)
    rng = RngStream(seed)
    ctl = {"rwalk": RandomWalk(), "pfsm": sample_pfsm(rng), "nn": NnGenome.random(rng)}[kind]
    res, trace = run_episode(sc, ctl, seed, trace=True)
    assert trace.shape == (sc.duration + 1, 15, 4)
    a = sc.arena
    xy = trace[:, :, :2]
    # containment with the body radius as margin
    assert np.all(xy @ a.normals.T <= a.offsets - R + 1e-9)
    # non-overlap
    d = np.linalg.norm(xy[:, :, None, :] - xy[:, None, :, :], axis=-1)
    d[:, np.arange(15), np.arange(15)] = np.inf
    assert d.min() >= 2 * R - 1e-6
    # speed bound: 1.2 cm per cycle plus a small collision slack
    assert np.linalg.norm(np.diff(xy, axis=0), axis=-1).max() <= 0.012 + 0.02
    # halt permanence: a halted sheep (LED off inside a white region) never moves again
    for j in range(5, 15):
        off = np.nonzero(trace[:, j, 3] == 0)[0]
        if off.size:
            t0 = off[0]
            assert np.all(trace[t0:, j] == trace[t0, j])
    assert math.isfinite(res.objective)
    assert res.objective == sc.objective(np.array(res.final_sheep_positions))


def test_trace_csv(tmp_path):
    sc = build_scenario("aggregation", "c2").replace(duration=10)
    _, trace = run_episode(sc, RandomWalk(), 3, trace=True)
    path = tmp_path / "trace.csv"
    write_trace_csv(trace, path)
    rows = list(csv.reader(path.open(newline="")))
    assert rows[0] == ["tick", "robot", "x", "y", "heading", "led"]
    assert len(rows) == 1 + 11 * 15
    assert rows[-1][:2] == ["10", "14"] and rows[-1][5] == "yellow"
    assert float(rows[16][2]) == trace[1, 0, 0]
