"""Episode execution: placement, the synchronous control loop and scoring."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from ._rng import RngStream
from .core import ColorSignal, Pose, RobotBody, RobotKind
from .errors import ControllerFault, InvalidArgument, PlacementInfeasible
from .pfsm import ControllerMemory, SheepController
from .rm3 import SensorReadings, clamp_actuation

__all__ = [
    "EpisodeResult",
    "WorldState",
    "evaluate_many",
    "init_episode",
    "resolve_collisions",
    "run_episode",
    "step",
    "write_trace_csv",
]

MAX_REJECTIONS = 100_000
# surface gap kept free at placement so nobody starts inside a sensor's range
PLACEMENT_GAP = K.PROX_RANGE


class WorldState:
    """Mutable state of one episode, stored as flat arrays.

    Robots ``0 .. n_shepherds-1`` are shepherds, the rest are sheep.
    """

    def __init__(self, scenario, pos, heading, led, halted, mem, rng, tick=0):
        self.scenario = scenario
        self.arena = scenario.arena
        self.pos = pos
        self.heading = heading
        self.led = led
        self.halted = halted
        self.mem = mem
        self.rng = rng
        self.tick = tick
        self._py_memory = {}
        self._regions = scenario.arena.region_arrays()

    @classmethod
    def build(cls, scenario, poses, leds=None, halted=None, seed=0):
        """World with robots at explicit poses; sheep default to yellow LEDs."""
        n = len(poses)
        if n != scenario.n_robots:
            raise InvalidArgument(f"scenario needs {scenario.n_robots} poses, got {n}")
        pos = np.array([[p.x, p.y] for p in poses], dtype=np.float64).reshape(n, 2)
        heading = np.array([p.heading for p in poses], dtype=np.float64)
        if leds is None:
            leds = [ColorSignal.NONE] * scenario.n_shepherds + [ColorSignal.YELLOW] * scenario.n_sheep
        led = np.array([int(ColorSignal.parse(c)) for c in leds], dtype=np.int64)
        h = np.zeros(n, dtype=np.bool_) if halted is None else np.array(halted, dtype=np.bool_)
        return cls(scenario, pos, heading, led, h, np.zeros((n, 4), dtype=np.int64), RngStream(seed))

    @property
    def n_shepherds(self):
        return self.scenario.n_shepherds

    @property
    def robots(self):
        out = []
        for i in range(self.pos.shape[0]):
            kind = RobotKind.SHEPHERD if i < self.n_shepherds else RobotKind.SHEEP
            out.append(RobotBody(kind, Pose(*self.pos[i], self.heading[i]),
                                 ColorSignal(int(self.led[i])), bool(self.halted[i])))
        return out

    @property
    def sheep_positions(self):
        return self.pos[self.n_shepherds:].copy()

    def copy(self):
        w = WorldState(self.scenario, self.pos.copy(), self.heading.copy(), self.led.copy(),
                       self.halted.copy(), self.mem.copy(), self.rng.copy(), self.tick)
        w._py_memory = {k: v.copy() for k, v in self._py_memory.items()}
        return w

    def kernel_context(self):
        rc, rr, rcol = self._regions
        a = self.arena
        return (a.normals, a.offsets, rc, rr, rcol, int(a.default_color))


def init_episode(scenario, seed):
    """Place all robots by rejection sampling and set their initial LEDs."""
    rng = RngStream(seed)
    n = scenario.n_robots
    pos = np.zeros((n, 2))
    heading = np.zeros(n)
    rc, rr, rcol = scenario.arena.region_arrays()
    disk = scenario.placement_radius or 0.0
    rej = K.place_robots(rng.state, n, disk, 2 * K.RADIUS + PLACEMENT_GAP, K.RADIUS + PLACEMENT_GAP,
                         scenario.arena.normals, scenario.arena.offsets, rc, rr, rcol,
                         MAX_REJECTIONS, pos, heading)
    if rej < 0:
        raise PlacementInfeasible(f"could not place {n} robots after {MAX_REJECTIONS} rejections")
    led = np.zeros(n, dtype=np.int64)
    led[scenario.n_shepherds:] = int(ColorSignal.YELLOW)
    return WorldState(scenario, pos, heading, led, np.zeros(n, dtype=np.bool_),
                      np.zeros((n, 4), dtype=np.int64), rng)


def _sheep(world, sheep_controller):
    if sheep_controller is None:
        sc = world.scenario
        return SheepController(sc.sheep_variant.code, sc.repulsion_first)
    if not isinstance(sheep_controller, SheepController):
        raise InvalidArgument("sheep controller must be a SheepController")
    return sheep_controller


def step(world, shepherd_controller, sheep_controller=None):
    """Advance ``world`` one control cycle in place and return it.

    ``shepherd_controller`` is either a controller object (PFSM, network or
    built-in) or a callable ``f(readings, memory, rng) -> Actuation``.
    """
    if world.tick >= world.scenario.duration:
        raise InvalidArgument("episode already finished")
    sheep = _sheep(world, sheep_controller)
    n = world.pos.shape[0]
    ws = K.new_workspace(n)
    if hasattr(shepherd_controller, "kernel_program"):
        p = shepherd_controller.kernel_program()
        ok = K.step_world(world.pos, world.heading, world.led, world.halted, world.mem, world.rng.state,
                          *world.kernel_context(), world.n_shepherds, p.kind, p.beh, p.beh_theta,
                          p.n_tr, p.tr, p.tr_beta, p.weights, sheep.variant, sheep.repulsion_first, ws)
        if not ok:
            raise ControllerFault("controller produced a non-finite actuation")
    else:
        _python_step(world, shepherd_controller, sheep, ws)
    world.tick += 1
    return world


def _python_step(world, controller, sheep, ws):
    prox, gnd, cam, vang, acc, vl, vr, new_led, was_halted, inputs, outputs = ws
    K.sense_all(world.pos, world.heading, world.led, *world.kernel_context(), prox, gnd, cam, vang, acc)
    was_halted[:] = world.halted
    blank = np.zeros(0)
    K.control_all(world.n_shepherds, K.CTL_IDLE, np.zeros((4, 4), np.int64), blank,
                  np.zeros(4, np.int64), np.zeros((4, 4, 3), np.int64), np.zeros((4, 4)), blank,
                  sheep.variant, sheep.repulsion_first, prox, gnd, cam, vang, world.mem, world.halted,
                  world.rng.state, vl, vr, new_led, inputs, outputs)
    for i in range(world.n_shepherds):
        memory = world._py_memory.setdefault(i, ControllerMemory())
        act = controller(SensorReadings.from_arrays(prox, gnd, cam, vang, i), memory, world.rng)
        if not (math.isfinite(act.v_left) and math.isfinite(act.v_right)):
            raise ControllerFault(f"robot {i} produced a non-finite actuation")
        act = clamp_actuation(act)
        vl[i], vr[i], new_led[i] = act.v_left, act.v_right, int(act.led)
    K.advance(world.pos, world.heading, world.led, world.halted, vl, vr, new_led, was_halted,
              world.arena.normals, world.arena.offsets)


def resolve_collisions(world, passes=K.COLLISION_PASSES):
    """Separate overlapping robots and pull escaped ones back inside, in place."""
    K.resolve_collisions(world.pos, world.halted, world.arena.normals, world.arena.offsets, passes)
    return world


@dataclass(frozen=True)
class EpisodeResult:
    objective: float
    seed: int
    final_sheep_positions: tuple
    episodes_consumed: int = 1
    faulted: bool = False

    def to_json(self):
        return json.dumps({
            "objective": self.objective.hex(),
            "seed": self.seed,
            "final_sheep_positions": [[x.hex(), y.hex()] for x, y in self.final_sheep_positions],
            "episodes_consumed": self.episodes_consumed,
            "faulted": self.faulted,
        }, sort_keys=True)


def run_episode(scenario, shepherd_controller, seed, trace=False):
    """Run one full episode; with ``trace`` returns ``(result, trace_array)``.

    The trace has one row per cycle boundary and columns (x, y, heading, led)
    per robot. A controller fault ends the episode with the mission's worst
    objective.
    """
    world = init_episode(scenario, seed)
    ticks = scenario.duration
    n = scenario.n_robots
    record = np.zeros((ticks + 1, n, 4)) if trace else np.zeros((0, n, 4))
    faulted = False
    if hasattr(shepherd_controller, "kernel_program"):
        p = shepherd_controller.kernel_program()
        sheep = _sheep(world, None)
        done = K.run_episode_kernel(
            world.pos, world.heading, world.led, world.halted, world.mem, world.rng.state,
            *world.kernel_context(), scenario.n_shepherds, p.kind, p.beh, p.beh_theta, p.n_tr,
            p.tr, p.tr_beta, p.weights, sheep.variant, sheep.repulsion_first, ticks, record)
        faulted = done < ticks
        if trace:
            record = record[: done + 1]
    else:
        rows = [_snapshot(world)]
        try:
            for _ in range(ticks):
                step(world, shepherd_controller)
                rows.append(_snapshot(world))
        except ControllerFault:
            faulted = True
        record = np.array(rows)
    final = world.sheep_positions
    objective = scenario.worst_objective() if faulted else scenario.objective(final)
    result = EpisodeResult(float(objective), int(seed), tuple(map(tuple, final.tolist())), 1, faulted)
    return (result, record) if trace else result


def _snapshot(world):
    return np.column_stack([world.pos, world.heading, world.led.astype(np.float64)])


def evaluate_many(scenario, controller, seeds, threads=1):
    """Objectives for several seeds; parallel runs give the serial results."""
    seeds = list(seeds)
    if threads <= 1 or len(seeds) <= 1:
        return [run_episode(scenario, controller, s) for s in seeds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda s: run_episode(scenario, controller, s), seeds))


def write_trace_csv(trace, path_or_file):
    """Write a trace as rows (tick, robot, x, y, heading, led)."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="", encoding="utf-8") if own else path_or_file
    try:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["tick", "robot", "x", "y", "heading", "led"])
        for t in range(trace.shape[0]):
            for i in range(trace.shape[1]):
                x, y, h, led = trace[t, i]
                w.writerow([t, i, repr(float(x)), repr(float(y)), repr(float(h)),
                            ColorSignal(int(led)).name.lower()])
    finally:
        if own:
            fh.close()
