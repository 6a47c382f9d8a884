"""Probabilistic finite-state machines built from behavior and condition modules.

Also hosts the two fixed controllers that share the module machinery: the
sheep controller and the random-walk baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels as K
from ._program import blank_program
from .core import ColorSignal
from .errors import FormatError, InvalidArgument
from .rm3 import Actuation

__all__ = [
    "BlackFloor",
    "Circling",
    "ColorDetection",
    "ColorElusion",
    "ColorFollowing",
    "ControllerMemory",
    "Exploration",
    "FixedProbability",
    "GrayFloor",
    "PfsmConfig",
    "PfsmExecState",
    "RandomWalk",
    "SheepController",
    "Stop",
    "Transition",
    "WhiteFloor",
    "behavior_output",
    "mutate_pfsm",
    "pfsm_step",
    "rwalk_step",
    "sample_pfsm",
    "sheep_step",
    "transition_fires",
]

MAX_STATES = 4
MAX_TRANSITIONS = 4
TAU_RANGE = (1, 100)
PFSM_FORMAT_VERSION = 1
_THETA_LO = math.nextafter(-math.pi, 0.0)
_DETECTABLE = (ColorSignal.CYAN, ColorSignal.MAGENTA, ColorSignal.YELLOW)


def _delta(value):
    c = ColorSignal.parse(value)
    if c not in _DETECTABLE:
        raise InvalidArgument(f"detectable color must be cyan, magenta or yellow, got {c.name}")
    return c


def _beta(value):
    b = float(value)
    if not 0.0 <= b <= 1.0:
        raise InvalidArgument(f"probability {value!r} outside [0, 1]")
    return b


# behaviors -----------------------------------------------------------------


@dataclass(frozen=True)
class Exploration:
    tau: int = 50
    gamma: ColorSignal = ColorSignal.NONE
    code = K.B_EXPLORATION
    name = "exploration"

    def __post_init__(self):
        if isinstance(self.tau, bool) or int(self.tau) != self.tau:
            raise InvalidArgument("tau must be an integer")
        if not TAU_RANGE[0] <= self.tau <= TAU_RANGE[1]:
            raise InvalidArgument(f"tau {self.tau} outside {TAU_RANGE}")
        object.__setattr__(self, "tau", int(self.tau))
        object.__setattr__(self, "gamma", ColorSignal.parse(self.gamma))


@dataclass(frozen=True)
class Stop:
    gamma: ColorSignal = ColorSignal.NONE
    code = K.B_STOP
    name = "stop"

    def __post_init__(self):
        object.__setattr__(self, "gamma", ColorSignal.parse(self.gamma))


@dataclass(frozen=True)
class ColorFollowing:
    delta: ColorSignal = ColorSignal.MAGENTA
    gamma: ColorSignal = ColorSignal.NONE
    code = K.B_FOLLOWING
    name = "color_following"

    def __post_init__(self):
        object.__setattr__(self, "delta", _delta(self.delta))
        object.__setattr__(self, "gamma", ColorSignal.parse(self.gamma))


@dataclass(frozen=True)
class ColorElusion:
    delta: ColorSignal = ColorSignal.CYAN
    gamma: ColorSignal = ColorSignal.NONE
    code = K.B_ELUSION
    name = "color_elusion"

    def __post_init__(self):
        object.__setattr__(self, "delta", _delta(self.delta))
        object.__setattr__(self, "gamma", ColorSignal.parse(self.gamma))


@dataclass(frozen=True)
class Circling:
    """Turn at ``theta`` rad/s while moving forward at half speed."""

    theta: float = 1.0
    gamma: ColorSignal = ColorSignal.NONE
    code = K.B_CIRCLING
    name = "circling"

    def __post_init__(self):
        t = float(self.theta)
        if not (-math.pi < t <= math.pi) or t == 0.0:
            raise InvalidArgument(f"theta {self.theta!r} outside (-pi, pi] or zero")
        object.__setattr__(self, "theta", t)
        object.__setattr__(self, "gamma", ColorSignal.parse(self.gamma))


BEHAVIORS = (Exploration, Stop, ColorFollowing, ColorElusion, Circling)


# conditions ----------------------------------------------------------------


@dataclass(frozen=True)
class BlackFloor:
    beta: float = 1.0
    code = K.C_BLACK
    name = "black_floor"

    def __post_init__(self):
        object.__setattr__(self, "beta", _beta(self.beta))


@dataclass(frozen=True)
class GrayFloor:
    beta: float = 1.0
    code = K.C_GRAY
    name = "gray_floor"

    def __post_init__(self):
        object.__setattr__(self, "beta", _beta(self.beta))


@dataclass(frozen=True)
class WhiteFloor:
    beta: float = 1.0
    code = K.C_WHITE
    name = "white_floor"

    def __post_init__(self):
        object.__setattr__(self, "beta", _beta(self.beta))


@dataclass(frozen=True)
class FixedProbability:
    beta: float = 0.5
    code = K.C_FIXED
    name = "fixed_probability"

    def __post_init__(self):
        object.__setattr__(self, "beta", _beta(self.beta))


@dataclass(frozen=True)
class ColorDetection:
    delta: ColorSignal = ColorSignal.MAGENTA
    beta: float = 1.0
    code = K.C_COLOR
    name = "color_detection"

    def __post_init__(self):
        object.__setattr__(self, "delta", _delta(self.delta))
        object.__setattr__(self, "beta", _beta(self.beta))


CONDITIONS = (BlackFloor, GrayFloor, WhiteFloor, FixedProbability, ColorDetection)
_BY_NAME = {cls.name: cls for cls in BEHAVIORS + CONDITIONS}


@dataclass(frozen=True)
class Transition:
    condition: object
    target: int


# machine -------------------------------------------------------------------


@dataclass(frozen=True)
class PfsmConfig:
    """Behavior states with outgoing probabilistic transitions; state 0 is initial.

    ``transitions[s]`` lists the transitions leaving state ``s`` in the
    order they are evaluated.
    """

    states: tuple
    transitions: tuple = None

    def __post_init__(self):
        states = tuple(self.states)
        trans = self.transitions
        if trans is None:
            trans = ((),) * len(states)
        trans = tuple(tuple(t) for t in trans)
        if not 1 <= len(states) <= MAX_STATES:
            raise InvalidArgument(f"a machine has 1 to {MAX_STATES} states, got {len(states)}")
        if len(trans) != len(states):
            raise InvalidArgument("one transition list per state is required")
        for s, b in enumerate(states):
            if not isinstance(b, BEHAVIORS):
                raise InvalidArgument(f"state {s} is not a behavior module")
        for s, out in enumerate(trans):
            if len(out) > MAX_TRANSITIONS:
                raise InvalidArgument(f"state {s} has more than {MAX_TRANSITIONS} transitions")
            for t in out:
                if not isinstance(t, Transition) or not isinstance(t.condition, CONDITIONS):
                    raise InvalidArgument(f"state {s} has a malformed transition")
                if not (isinstance(t.target, int) and 0 <= t.target < len(states)):
                    raise InvalidArgument(f"transition target {t.target!r} out of range")
                if t.target == s:
                    raise InvalidArgument(f"self-transition on state {s}")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "transitions", trans)

    @property
    def n_states(self):
        return len(self.states)

    def kernel_program(self):
        beh = np.zeros((4, 4), dtype=np.int64)
        theta = np.zeros(4)
        n_tr = np.zeros(4, dtype=np.int64)
        tr = np.zeros((4, 4, 3), dtype=np.int64)
        beta = np.zeros((4, 4))
        for s, b in enumerate(self.states):
            beh[s] = (b.code, getattr(b, "tau", 0), int(getattr(b, "delta", 0)), int(b.gamma))
            theta[s] = getattr(b, "theta", 0.0)
            n_tr[s] = len(self.transitions[s])
            for k, t in enumerate(self.transitions[s]):
                c = t.condition
                tr[s, k] = (c.code, int(getattr(c, "delta", 0)), t.target)
                beta[s, k] = c.beta
        return blank_program(K.CTL_PFSM, beh=beh, beh_theta=theta, n_tr=n_tr, tr=tr, tr_beta=beta)

    def to_dict(self):
        def module(m):
            d = {"behavior" if isinstance(m, BEHAVIORS) else "condition": m.name}
            for f in ("tau", "theta", "delta", "beta", "gamma"):
                if hasattr(m, f):
                    v = getattr(m, f)
                    d[f] = v.name.lower() if isinstance(v, ColorSignal) else v
            return d

        return {
            "format_version": PFSM_FORMAT_VERSION,
            "type": "pfsm",
            "states": [
                dict(module(b), transitions=[dict(module(t.condition), target=t.target) for t in out])
                for b, out in zip(self.states, self.transitions)
            ],
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            if int(doc.get("format_version", -1)) != PFSM_FORMAT_VERSION:
                raise FormatError(f"unsupported pfsm format_version {doc.get('format_version')!r}")
            if doc.get("type", "pfsm") != "pfsm":
                raise FormatError(f"not a pfsm document: type {doc.get('type')!r}")
            states, trans = [], []
            for sd in doc["states"]:
                states.append(_module_from(sd, "behavior", BEHAVIORS))
                trans.append(tuple(
                    Transition(_module_from(td, "condition", CONDITIONS), _index(td["target"]))
                    for td in sd.get("transitions", [])
                ))
            return cls(tuple(states), tuple(trans))
        except FormatError:
            raise
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise FormatError(f"bad pfsm document: {exc}") from exc


def _index(v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise InvalidArgument(f"state index must be an integer, got {v!r}")
    return v


def _module_from(d, key, allowed):
    cls = _BY_NAME.get(d[key])
    if cls not in allowed:
        raise InvalidArgument(f"unknown {key} {d[key]!r}")
    fields = {k: v for k, v in d.items() if k not in (key, "target", "transitions")}
    return cls(**fields)


# sampling and mutation -----------------------------------------------------


def _random_color(rng, exclude=None, detectable=False):
    pool = list(_DETECTABLE if detectable else ColorSignal)
    if exclude is not None:
        pool.remove(exclude)
    return rng.choice(pool)


def _random_theta(rng):
    while True:
        t = math.pi - 2.0 * math.pi * rng.random()  # (-pi, pi]
        if t != 0.0:
            return t


def _random_behavior(rng, exclude=None):
    kinds = [b for b in BEHAVIORS if b is not exclude]
    cls = rng.choice(kinds)
    gamma = _random_color(rng)
    if cls is Exploration:
        return Exploration(rng.integers(TAU_RANGE[0], TAU_RANGE[1] + 1), gamma)
    if cls is Circling:
        return Circling(_random_theta(rng), gamma)
    if cls is Stop:
        return Stop(gamma)
    return cls(_random_color(rng, detectable=True), gamma)


def _random_condition(rng, exclude=None):
    kinds = [c for c in CONDITIONS if c is not exclude]
    cls = rng.choice(kinds)
    beta = rng.random()
    if cls is ColorDetection:
        return ColorDetection(_random_color(rng, detectable=True), beta)
    return cls(beta)


def _random_target(rng, source, n_states):
    t = rng.integers(n_states - 1)
    return t + 1 if t >= source else t


def sample_pfsm(rng):
    """Uniformly random machine: 1-4 states, 0-4 transitions per state."""
    n = rng.integers(1, MAX_STATES + 1)
    states = tuple(_random_behavior(rng) for _ in range(n))
    trans = []
    for s in range(n):
        k = rng.integers(0, MAX_TRANSITIONS + 1) if n > 1 else 0
        trans.append(tuple(Transition(_random_condition(rng), _random_target(rng, s, n)) for _ in range(k)))
    return PfsmConfig(states, tuple(trans))


def _perturb_int(rng, value, lo, hi, sigma):
    v = int(round(min(max(value + rng.normal(0.0, sigma), lo), hi)))
    if v == value:
        v = value + 1 if value < hi else value - 1
    return v


def _perturb_float(rng, value, lo, hi, sigma, forbid_zero=False):
    for _ in range(64):
        v = min(max(value + rng.normal(0.0, sigma), lo), hi)
        if v != value and not (forbid_zero and v == 0.0):
            return v
    return lo if value != lo else hi


def _numeric_sites(cfg):
    sites = []
    for s, b in enumerate(cfg.states):
        if isinstance(b, (Exploration, Circling)):
            sites.append(("state", s, None))
    for s, out in enumerate(cfg.transitions):
        for k in range(len(out)):
            sites.append(("transition", s, k))
    return sites


def _color_sites(cfg):
    sites = [("gamma", s, None) for s in range(cfg.n_states)]
    sites += [("delta", s, None) for s, b in enumerate(cfg.states) if hasattr(b, "delta")]
    sites += [("cdelta", s, k) for s, out in enumerate(cfg.transitions)
              for k, t in enumerate(out) if isinstance(t.condition, ColorDetection)]
    return sites


def _edit(cfg, states=None, transitions=None):
    return PfsmConfig(
        tuple(states) if states is not None else cfg.states,
        tuple(tuple(o) for o in transitions) if transitions is not None else cfg.transitions,
    )


def _with_transition(cfg, s, k, t):
    trans = [list(o) for o in cfg.transitions]
    trans[s][k] = t
    return _edit(cfg, transitions=trans)


def _mut_numeric(cfg, rng):
    kind, s, k = rng.choice(_numeric_sites(cfg))
    if kind == "state":
        b = cfg.states[s]
        if isinstance(b, Exploration):
            nb = replace(b, tau=_perturb_int(rng, b.tau, *TAU_RANGE, 0.1 * (TAU_RANGE[1] - TAU_RANGE[0])))
        else:
            nb = replace(b, theta=_perturb_float(rng, b.theta, _THETA_LO, math.pi, 0.2 * math.pi, True))
        states = list(cfg.states)
        states[s] = nb
        return _edit(cfg, states=states)
    t = cfg.transitions[s][k]
    c = replace(t.condition, beta=_perturb_float(rng, t.condition.beta, 0.0, 1.0, 0.1))
    return _with_transition(cfg, s, k, Transition(c, t.target))


def _mut_color(cfg, rng):
    kind, s, k = rng.choice(_color_sites(cfg))
    if kind == "cdelta":
        t = cfg.transitions[s][k]
        c = replace(t.condition, delta=_random_color(rng, t.condition.delta, detectable=True))
        return _with_transition(cfg, s, k, Transition(c, t.target))
    b = cfg.states[s]
    if kind == "gamma":
        nb = replace(b, gamma=_random_color(rng, b.gamma))
    else:
        nb = replace(b, delta=_random_color(rng, b.delta, detectable=True))
    states = list(cfg.states)
    states[s] = nb
    return _edit(cfg, states=states)


def _mut_module(cfg, rng):
    n_trans = sum(len(o) for o in cfg.transitions)
    pick = rng.integers(cfg.n_states + n_trans)
    if pick < cfg.n_states:
        states = list(cfg.states)
        states[pick] = _random_behavior(rng, exclude=type(states[pick]))
        return _edit(cfg, states=states)
    pick -= cfg.n_states
    for s, out in enumerate(cfg.transitions):
        if pick < len(out):
            t = out[pick]
            return _with_transition(cfg, s, pick, Transition(_random_condition(rng, type(t.condition)), t.target))
        pick -= len(out)
    raise AssertionError("unreachable")


def _mut_add_state(cfg, rng):
    n = cfg.n_states
    states = list(cfg.states) + [_random_behavior(rng)]
    trans = [list(o) for o in cfg.transitions] + [[]]
    # wire the new state in from one source with room, so it is reachable
    sources = [s for s in range(n) if len(trans[s]) < MAX_TRANSITIONS]
    if sources:
        trans[rng.choice(sources)].append(Transition(_random_condition(rng), n))
    return _edit(cfg, states, trans)


def _mut_remove_state(cfg, rng):
    victim = rng.integers(cfg.n_states)
    states = [b for s, b in enumerate(cfg.states) if s != victim]
    trans = []
    for s, out in enumerate(cfg.transitions):
        if s == victim:
            continue
        trans.append([Transition(t.condition, t.target - (t.target > victim))
                      for t in out if t.target != victim])
    return _edit(cfg, states, trans)


def _mut_add_transition(cfg, rng):
    s = rng.choice([s for s, o in enumerate(cfg.transitions) if len(o) < MAX_TRANSITIONS])
    trans = [list(o) for o in cfg.transitions]
    trans[s].insert(rng.integers(len(trans[s]) + 1),
                    Transition(_random_condition(rng), _random_target(rng, s, cfg.n_states)))
    return _edit(cfg, transitions=trans)


def _mut_remove_transition(cfg, rng):
    s = rng.choice([s for s, o in enumerate(cfg.transitions) if o])
    trans = [list(o) for o in cfg.transitions]
    del trans[s][rng.integers(len(trans[s]))]
    return _edit(cfg, transitions=trans)


def _mut_retarget(cfg, rng):
    sites = [(s, k) for s, o in enumerate(cfg.transitions) for k in range(len(o))]
    s, k = rng.choice(sites)
    t = cfg.transitions[s][k]
    options = [x for x in range(cfg.n_states) if x not in (s, t.target)]
    return _with_transition(cfg, s, k, Transition(t.condition, rng.choice(options)))


def _applicable(cfg):
    n = cfg.n_states
    n_trans = sum(len(o) for o in cfg.transitions)
    ops = [_mut_color, _mut_module]
    if _numeric_sites(cfg):
        ops.append(_mut_numeric)
    if n < MAX_STATES:
        ops.append(_mut_add_state)
    if n > 1:
        ops.append(_mut_remove_state)
        if any(len(o) < MAX_TRANSITIONS for o in cfg.transitions):
            ops.append(_mut_add_transition)
    if n_trans:
        ops.append(_mut_remove_transition)
        if n > 2:
            ops.append(_mut_retarget)
    return ops


EDIT_KINDS = ("numeric", "color", "module", "add_state", "remove_state",
              "add_transition", "remove_transition", "retarget")


def mutate_pfsm(config, rng):
    """Apply one uniformly chosen edit that is legal for ``config``."""
    return rng.choice(_applicable(config))(config, rng)


# execution -----------------------------------------------------------------


class ControllerMemory:
    """Per-robot controller scratch shared by every controller kind.

    For machines ``current`` is the active state; for sheep ``halted`` is
    the permanent capture flag.
    """

    def __init__(self, cells=None, halted=False):
        self.cells = np.zeros((1, 4), dtype=np.int64)
        if cells is not None:
            self.cells[0, :] = cells
        self.halted = np.array([bool(halted)])

    @property
    def current(self):
        return int(self.cells[0, 0])

    def copy(self):
        return ControllerMemory(self.cells[0], bool(self.halted[0]))

    def __eq__(self, other):
        return (isinstance(other, ControllerMemory) and np.array_equal(self.cells, other.cells)
                and bool(self.halted[0]) == bool(other.halted[0]))

    def __repr__(self):
        return f"ControllerMemory({self.cells[0].tolist()}, halted={bool(self.halted[0])})"


PfsmExecState = ControllerMemory


def _act(vl, vr, led):
    return Actuation(float(vl), float(vr), ColorSignal(int(led)))


def behavior_output(spec, readings, memory, rng):
    prox, _, cam, vang = readings.as_arrays()
    vl, vr, led = K.behavior_output_1(
        spec.code, getattr(spec, "tau", 0), int(getattr(spec, "delta", 0)), int(spec.gamma),
        getattr(spec, "theta", 0.0), prox, cam, vang, memory.cells, rng.state)
    return _act(vl, vr, led)


def transition_fires(condition, readings, rng):
    _, gnd, cam, _ = readings.as_arrays()
    return bool(K.transition_fires_1(condition.code, int(getattr(condition, "delta", 0)),
                                     condition.beta, gnd, cam, rng.state))


def pfsm_step(config, exec_state, readings, rng):
    """One control step; returns the actuation and the successor execution state."""
    nxt = exec_state.copy()
    if not 0 <= nxt.current < config.n_states:
        raise InvalidArgument("execution state does not belong to this machine")
    p = config.kernel_program()
    vl, vr, led = K.pfsm_step_1(p.beh, p.beh_theta, p.n_tr, p.tr, p.tr_beta,
                                *readings.as_arrays(), nxt.cells, rng.state)
    return _act(vl, vr, led), nxt


@dataclass(frozen=True)
class SheepController:
    """Fixed reactive sheep: flee cyan (C2, C3), approach magenta (C1, C3)."""

    variant: int = 3
    repulsion_first: bool = True

    def __post_init__(self):
        v = self.variant
        if isinstance(v, str):
            v = int(v.strip().lower().lstrip("c"))
        if v not in (1, 2, 3):
            raise InvalidArgument(f"unknown sheep variant {self.variant!r}")
        object.__setattr__(self, "variant", int(v))


def sheep_step(variant, readings, memory, rng=None, repulsion_first=True):
    """Sheep actuation; updates ``memory`` (nudge countdown, halt flag) in place.

    ``rng`` is accepted for interface symmetry; the sheep draw no randomness.
    """
    ctl = variant if isinstance(variant, SheepController) else SheepController(variant, repulsion_first)
    prox, gnd, cam, vang = readings.as_arrays()
    vl, vr, led, halted = K.sheep_step_1(ctl.variant, ctl.repulsion_first, prox, gnd, cam, vang,
                                         memory.cells, memory.halted)
    memory.halted[0] = halted
    return _act(vl, vr, led)


class RandomWalk:
    """Ballistic random-walk baseline: straight until blocked, then a random turn."""

    name = "rwalk"

    def kernel_program(self):
        return blank_program(K.CTL_RWALK)

    def to_dict(self):
        return {"format_version": PFSM_FORMAT_VERSION, "type": "builtin", "name": self.name}

    def __eq__(self, other):
        return isinstance(other, RandomWalk)

    def __hash__(self):
        return hash(self.name)

    def __repr__(self):
        return "RandomWalk()"


def rwalk_step(readings, memory, rng):
    prox = readings.as_arrays()[0]
    vl, vr, led = K.rwalk_step_1(prox, memory.cells, rng.state)
    return _act(vl, vr, led)
