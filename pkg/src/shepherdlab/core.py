"""Arena geometry, colors, robot bodies and the shared random stream."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from ._rng import RngStream, derive_seed
from .errors import FormatError, InvalidArgument, OutOfArena

__all__ = [
    "AXLE_LENGTH",
    "ArenaSpec",
    "ColorSignal",
    "FloorColor",
    "FloorRegion",
    "Pose",
    "ROBOT_RADIUS",
    "RngStream",
    "RobotBody",
    "RobotKind",
    "arena_regular_octagon",
    "derive_seed",
    "floor_color_at",
    "point_in_arena",
]

# e-puck body dimensions (m)
ROBOT_RADIUS = 0.035
AXLE_LENGTH = 0.053

ARENA_FORMAT_VERSION = 1
_BOUNDARY_TOL = 1e-12


class ColorSignal(IntEnum):
    NONE = 0
    CYAN = 1
    MAGENTA = 2
    YELLOW = 3

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            key = value.strip().upper()
            aliases = {"": "NONE", "∅": "NONE", "C": "CYAN", "M": "MAGENTA", "Y": "YELLOW"}
            key = aliases.get(key, key)
            try:
                return cls[key]
            except KeyError:
                raise FormatError(f"unknown color {value!r}") from None
        try:
            return cls(int(value))
        except (TypeError, ValueError):
            raise FormatError(f"unknown color {value!r}") from None


class FloorColor(IntEnum):
    BLACK = 0
    GRAY = 1
    WHITE = 2

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls[str(value).strip().upper()]
        except KeyError:
            raise FormatError(f"unknown floor color {value!r}") from None


class RobotKind(IntEnum):
    SHEPHERD = 0
    SHEEP = 1


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    heading: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.heading)):
            raise InvalidArgument("pose components must be finite")
        object.__setattr__(self, "heading", float(self.heading) % (2.0 * math.pi))


@dataclass(frozen=True)
class FloorRegion:
    """Circular floor patch; boundary points belong to the region."""

    center: tuple[float, float]
    radius: float
    color: FloorColor = FloorColor.WHITE

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidArgument("region radius must be positive")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "color", FloorColor.parse(self.color))

    @property
    def area(self):
        return math.pi * self.radius**2

    def contains(self, point):
        return math.hypot(point[0] - self.center[0], point[1] - self.center[1]) <= self.radius


@dataclass(frozen=True)
class ArenaSpec:
    """Convex polygonal arena with ordered circular floor regions.

    ``vertices`` are listed counter-clockwise. Each edge defines a half-plane
    ``normal . p <= offset``; a point is in the arena when it satisfies all of
    them.
    """

    vertices: np.ndarray
    regions: tuple[FloorRegion, ...] = ()
    default_color: FloorColor = FloorColor.GRAY
    normals: np.ndarray = field(init=False, repr=False, compare=False)
    offsets: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise InvalidArgument("arena needs at least three 2D vertices")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "regions", tuple(self.regions))
        object.__setattr__(self, "default_color", FloorColor.parse(self.default_color))
        edges = np.roll(v, -1, axis=0) - v
        # outward normal of a CCW edge (dx, dy) is (dy, -dx)
        normals = np.column_stack([edges[:, 1], -edges[:, 0]])
        lengths = np.hypot(normals[:, 0], normals[:, 1])
        if np.any(lengths == 0):
            raise InvalidArgument("repeated arena vertex")
        normals = normals / lengths[:, None]
        offsets = np.einsum("ij,ij->i", normals, v)
        if np.any(np.einsum("ij,kj->ik", normals, v) > offsets[:, None] + 1e-9):
            raise InvalidArgument("arena vertices must form a convex counter-clockwise polygon")
        normals.setflags(write=False)
        offsets.setflags(write=False)
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "offsets", offsets)
        for region in self.regions:
            if self.wall_clearance(region.center) < region.radius - 1e-12:
                raise InvalidArgument(f"region {region} is not fully inside the arena")

    def __eq__(self, other):
        if not isinstance(other, ArenaSpec):
            return NotImplemented
        return (
            np.array_equal(self.vertices, other.vertices)
            and self.regions == other.regions
            and self.default_color == other.default_color
        )

    def __hash__(self):
        return hash((self.vertices.tobytes(), self.regions, self.default_color))

    @property
    def area(self):
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))

    @property
    def circumradius(self):
        return float(np.max(np.hypot(self.vertices[:, 0], self.vertices[:, 1])))

    @property
    def diameter(self):
        d = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.max(np.hypot(d[..., 0], d[..., 1])))

    def wall_clearance(self, point):
        """Signed distance from ``point`` to the nearest wall line (positive inside)."""
        p = np.asarray(point, dtype=np.float64)
        return float(np.min(self.offsets - self.normals @ p))

    def white_regions(self):
        return tuple(r for r in self.regions if r.color == FloorColor.WHITE)

    def region_arrays(self):
        n = len(self.regions)
        centers = np.zeros((n, 2))
        radii = np.zeros(n)
        colors = np.zeros(n, dtype=np.int64)
        for i, r in enumerate(self.regions):
            centers[i] = r.center
            radii[i] = r.radius
            colors[i] = int(r.color)
        return centers, radii, colors

    def to_dict(self):
        return {
            "format_version": ARENA_FORMAT_VERSION,
            "vertices": [[float(x), float(y)] for x, y in self.vertices],
            "default_color": self.default_color.name.lower(),
            "regions": [
                {"center": list(r.center), "radius": r.radius, "color": r.color.name.lower()}
                for r in self.regions
            ],
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            if int(doc.get("format_version", -1)) != ARENA_FORMAT_VERSION:
                raise FormatError(f"unsupported arena format_version {doc.get('format_version')!r}")
            regions = tuple(
                FloorRegion(tuple(r["center"]), float(r["radius"]), FloorColor.parse(r["color"]))
                for r in doc.get("regions", [])
            )
            return cls(
                np.array(doc["vertices"], dtype=np.float64),
                regions,
                FloorColor.parse(doc.get("default_color", "gray")),
            )
        except (KeyError, TypeError, InvalidArgument) as exc:
            raise FormatError(f"bad arena document: {exc}") from exc


@dataclass
class RobotBody:
    kind: RobotKind
    pose: Pose
    led: ColorSignal = ColorSignal.NONE
    halted: bool = False
    radius: float = ROBOT_RADIUS
    axle_length: float = AXLE_LENGTH

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidArgument("robot radius must be positive")


def octagon_side(area):
    return math.sqrt(area / (2.0 * (1.0 + math.sqrt(2.0))))


def arena_regular_octagon(area=2.8, regions=()):
    """Regular octagon of the given area, centered at the origin.

    One vertex lies on the positive x-axis and vertices run counter-clockwise.

    >>> round(arena_regular_octagon(2.8).area, 12)
    2.8
    """
    if not (isinstance(area, (int, float)) and math.isfinite(area) and area > 0):
        raise InvalidArgument(f"octagon area must be positive, got {area!r}")
    # area = 2 R^2 sin(pi/4) * 2 = 2 sqrt(2) R^2
    circumradius = math.sqrt(area / (2.0 * math.sqrt(2.0)))
    angles = np.arange(8) * (math.pi / 4.0)
    vertices = circumradius * np.column_stack([np.cos(angles), np.sin(angles)])
    vertices[0, 1] = 0.0
    return ArenaSpec(vertices, tuple(regions))


def point_in_arena(arena, point):
    p = np.asarray(point, dtype=np.float64)
    if not np.all(np.isfinite(p)):
        return False
    return bool(np.all(arena.normals @ p <= arena.offsets + _BOUNDARY_TOL))


def floor_color_at(arena, point):
    """Color of the last region containing ``point``, else the arena default."""
    if not point_in_arena(arena, point):
        raise OutOfArena(f"point {tuple(point)} is outside the arena")
    for region in reversed(arena.regions):
        if region.contains(point):
            return region.color
    return arena.default_color
