"""Mission scenarios and their objective functions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import ArenaSpec, FloorColor, FloorRegion, arena_regular_octagon
from .errors import FormatError, InvalidArgument

__all__ = [
    "HERDING_REGION_DISTANCE",
    "HERDING_REGION_RADIUS",
    "Mission",
    "ObjectiveSense",
    "ScenarioSpec",
    "SheepVariant",
    "all_scenarios",
    "build_scenario",
    "f1_centroid_spread",
    "f2_sheep_outside",
]

ARENA_AREA = 2.8
N_SHEPHERDS = 5
N_SHEEP = 10
DURATION = 1200
CENTRAL_DISK = 0.60
HERDING_REGION_RADIUS = 0.309
HERDING_REGION_DISTANCE = 0.64
# spawn disk that keeps every ground probe off the white goals
HERDING_SPAWN_RADIUS = 0.29
SCENARIO_FORMAT_VERSION = 1


class ObjectiveSense(str, Enum):
    MINIMIZE = "minimize"
    MAXIMIZE = "maximize"

    def better(self, a, b):
        """True when score ``a`` is strictly better than ``b``."""
        return a < b if self is ObjectiveSense.MINIMIZE else a > b

    def sign(self):
        """Multiplier turning scores into costs (lower is better)."""
        return 1.0 if self is ObjectiveSense.MINIMIZE else -1.0


class Mission(str, Enum):
    AGGREGATION = "aggregation"
    DISPERSION = "dispersion"
    HERDING = "herding"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise InvalidArgument(f"unknown mission {value!r}") from None

    @property
    def sense(self):
        return ObjectiveSense.MAXIMIZE if self is Mission.DISPERSION else ObjectiveSense.MINIMIZE


class SheepVariant(str, Enum):
    C1 = "c1"
    C2 = "c2"
    C3 = "c3"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise InvalidArgument(f"unknown sheep variant {value!r}") from None

    @property
    def code(self):
        return int(self.value[1])


def _points(positions):
    p = np.asarray(positions, dtype=np.float64)
    if p.ndim != 2 or p.shape[1] != 2 or p.shape[0] == 0:
        raise InvalidArgument("positions must be a non-empty (n, 2) array")
    if not np.all(np.isfinite(p)):
        raise InvalidArgument("positions must be finite")
    return p


def f1_centroid_spread(sheep_positions):
    """Mean distance from each position to the centroid of all positions.

    >>> f1_centroid_spread([(-1, 0)] * 5 + [(1, 0)] * 5)
    1.0
    """
    p = _points(sheep_positions)
    # offsets from the first point keep coincident inputs exactly at zero
    d = p - p[0]
    d -= d.mean(axis=0)
    return float(np.mean(np.hypot(d[:, 0], d[:, 1])))


def f2_sheep_outside(sheep_positions, white_regions):
    """Number of positions contained in none of the regions (closed disks)."""
    p = _points(sheep_positions)
    inside = np.zeros(p.shape[0], dtype=bool)
    for r in white_regions:
        inside |= np.hypot(p[:, 0] - r.center[0], p[:, 1] - r.center[1]) <= r.radius
    return int(np.count_nonzero(~inside))


def herding_regions(distance=HERDING_REGION_DISTANCE, radius=HERDING_REGION_RADIUS):
    return tuple(
        FloorRegion((distance * math.cos(math.radians(b)), distance * math.sin(math.radians(b))),
                    radius, FloorColor.WHITE)
        for b in (45.0, 135.0, 225.0, 315.0)
    )


@dataclass(frozen=True)
class ScenarioSpec:
    """A mission, a sheep variant and the arena they play out in.

    ``placement_radius`` of ``None`` spreads robots over the whole arena.
    Robot counts default to the standard five shepherds and ten sheep;
    other counts exist for test fixtures.
    """

    mission: Mission
    sheep_variant: SheepVariant
    arena: ArenaSpec
    placement_radius: float | None = None
    n_shepherds: int = N_SHEPHERDS
    n_sheep: int = N_SHEEP
    duration: int = DURATION
    repulsion_first: bool = True
    sense: ObjectiveSense = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "mission", Mission.parse(self.mission))
        object.__setattr__(self, "sheep_variant", SheepVariant.parse(self.sheep_variant))
        object.__setattr__(self, "sense", self.mission.sense)
        if self.n_shepherds < 0 or self.n_sheep < 1 or self.duration < 0:
            raise InvalidArgument("invalid robot counts or duration")
        if self.placement_radius is not None and not self.placement_radius > 0:
            raise InvalidArgument("placement radius must be positive")
        if self.mission is Mission.HERDING and len(self.arena.white_regions()) != 4:
            raise InvalidArgument("herding needs exactly four white regions")

    @property
    def name(self):
        return f"{self.mission.value}-{self.sheep_variant.value}"

    @property
    def n_robots(self):
        return self.n_shepherds + self.n_sheep

    def objective(self, sheep_positions):
        if self.mission is Mission.HERDING:
            return float(f2_sheep_outside(sheep_positions, self.arena.white_regions()))
        return f1_centroid_spread(sheep_positions)

    def worst_objective(self):
        if self.mission is Mission.AGGREGATION:
            return self.arena.diameter
        if self.mission is Mission.DISPERSION:
            return 0.0
        return float(self.n_sheep)

    def replace(self, **changes):
        doc = {k: getattr(self, k) for k in
               ("mission", "sheep_variant", "arena", "placement_radius", "n_shepherds",
                "n_sheep", "duration", "repulsion_first")}
        doc.update(changes)
        return ScenarioSpec(**doc)

    def to_dict(self):
        return {
            "format_version": SCENARIO_FORMAT_VERSION,
            "mission": self.mission.value,
            "sheep": self.sheep_variant.value,
            "arena": self.arena.to_dict(),
            "placement_radius": self.placement_radius,
            "n_shepherds": self.n_shepherds,
            "n_sheep": self.n_sheep,
            "duration": self.duration,
            "repulsion_first": self.repulsion_first,
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            if int(doc.get("format_version", -1)) != SCENARIO_FORMAT_VERSION:
                raise FormatError(f"unsupported scenario format_version {doc.get('format_version')!r}")
            return cls(
                doc["mission"], doc["sheep"], ArenaSpec.from_dict(doc["arena"]),
                doc.get("placement_radius"), int(doc.get("n_shepherds", N_SHEPHERDS)),
                int(doc.get("n_sheep", N_SHEEP)), int(doc.get("duration", DURATION)),
                bool(doc.get("repulsion_first", True)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"bad scenario document: {exc}") from exc


def build_scenario(mission, variant, repulsion_first=True):
    """Standard scenario for a (mission, sheep variant) pair."""
    mission = Mission.parse(mission)
    if mission is Mission.HERDING:
        arena = arena_regular_octagon(ARENA_AREA, herding_regions())
        radius = HERDING_SPAWN_RADIUS
    else:
        arena = arena_regular_octagon(ARENA_AREA)
        radius = None if mission is Mission.AGGREGATION else CENTRAL_DISK
    return ScenarioSpec(mission, variant, arena, radius, repulsion_first=repulsion_first)


def all_scenarios():
    return [build_scenario(m, v) for m in Mission for v in SheepVariant]
