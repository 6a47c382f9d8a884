"""Sensor readings and actuation commands exchanged with control software.

Readings are computed by the same compiled routine the episode runner uses,
so a reading obtained here is exactly what a controller sees in simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .core import ColorSignal, FloorColor
from .errors import InvalidActuation, InvalidArgument

__all__ = [
    "Actuation",
    "ColorVector",
    "MAX_SPEED",
    "PROX_RANGE",
    "CAMERA_RANGE",
    "SensorReadings",
    "clamp_actuation",
    "sense",
    "sense_camera",
    "sense_ground",
    "sense_proximity",
]

MAX_SPEED = K.VMAX
PROX_RANGE = K.PROX_RANGE
CAMERA_RANGE = K.CAM_RANGE
PROX_ANGLES = tuple(float(a) for a in K.PROX_ANGLES)
GROUND_ANGLES = tuple(float(a) for a in K.GND_ANGLES)
PERCEIVED = (ColorSignal.CYAN, ColorSignal.MAGENTA, ColorSignal.YELLOW)


@dataclass(frozen=True)
class ColorVector:
    present: bool = False
    angle: float = 0.0

    @property
    def magnitude(self):
        return 1.0 if self.present else 0.0


@dataclass(frozen=True)
class SensorReadings:
    """One robot's perception for one control cycle.

    ``cam`` and ``v_color`` are indexed cyan, magenta, yellow.
    """

    prox: tuple = (0.0,) * 8
    gnd: tuple = (FloorColor.GRAY,) * 3
    cam: tuple = (False, False, False)
    v_color: tuple = (ColorVector(),) * 3

    def __post_init__(self):
        prox = tuple(float(p) for p in self.prox)
        if len(prox) != 8 or any(not 0.0 <= p <= 1.0 for p in prox):
            raise InvalidArgument("prox must be 8 values in [0, 1]")
        gnd = tuple(FloorColor(g) for g in self.gnd)
        if len(gnd) != 3:
            raise InvalidArgument("gnd must have 3 entries")
        vc = tuple(self.v_color)
        cam = tuple(bool(c) for c in self.cam)
        if len(cam) != 3 or len(vc) != 3:
            raise InvalidArgument("cam and v_color must have 3 entries")
        vc = tuple(ColorVector(c, v.angle % (2.0 * math.pi) if c else 0.0) for c, v in zip(cam, vc))
        object.__setattr__(self, "prox", prox)
        object.__setattr__(self, "gnd", gnd)
        object.__setattr__(self, "cam", cam)
        object.__setattr__(self, "v_color", vc)

    @classmethod
    def seeing(cls, prox=None, gnd=None, **angles):
        """Readings with colors perceived at the given body-frame angles.

        >>> SensorReadings.seeing(magenta=0.0).cam
        (False, True, False)
        """
        cam = [False, False, False]
        vc = [ColorVector()] * 3
        for k, name in enumerate(("cyan", "magenta", "yellow")):
            angle = angles.pop(name, None)
            if angle is not None:
                cam[k] = True
                vc[k] = ColorVector(True, float(angle))
        if angles:
            raise InvalidArgument(f"unknown colors {sorted(angles)}")
        return cls(prox if prox is not None else (0.0,) * 8,
                   gnd if gnd is not None else (FloorColor.GRAY,) * 3, tuple(cam), tuple(vc))

    def as_arrays(self):
        """1-row kernel arrays (prox, gnd, cam, vang)."""
        prox = np.array([self.prox], dtype=np.float64)
        gnd = np.array([[int(g) for g in self.gnd]], dtype=np.int64)
        cam = np.array([self.cam], dtype=np.bool_)
        vang = np.array([[v.angle for v in self.v_color]], dtype=np.float64)
        return prox, gnd, cam, vang

    @classmethod
    def from_arrays(cls, prox, gnd, cam, vang, i=0):
        return cls(
            tuple(prox[i]),
            tuple(FloorColor(int(g)) for g in gnd[i]),
            tuple(bool(c) for c in cam[i]),
            tuple(ColorVector(bool(cam[i, c]), float(vang[i, c])) for c in range(3)),
        )


@dataclass(frozen=True)
class Actuation:
    v_left: float = 0.0
    v_right: float = 0.0
    led: ColorSignal = ColorSignal.NONE

    def __post_init__(self):
        object.__setattr__(self, "led", ColorSignal.parse(self.led))


def clamp_actuation(raw):
    """Clamp both wheel speeds into the admissible range; NaN is rejected."""
    vl, vr = float(raw.v_left), float(raw.v_right)
    if math.isnan(vl) or math.isnan(vr):
        raise InvalidActuation("wheel velocity is NaN")
    return Actuation(min(max(vl, -MAX_SPEED), MAX_SPEED), min(max(vr, -MAX_SPEED), MAX_SPEED), raw.led)


def _sense_arrays(world):
    arena = world.arena
    rc, rr, rcol = arena.region_arrays()
    n = world.pos.shape[0]
    prox = np.zeros((n, 8))
    gnd = np.zeros((n, 3), dtype=np.int64)
    cam = np.zeros((n, 3), dtype=np.bool_)
    vang = np.zeros((n, 3))
    acc = np.zeros((n, 3, 3))
    K.sense_all(world.pos, world.heading, world.led, arena.normals, arena.offsets,
                rc, rr, rcol, int(arena.default_color), prox, gnd, cam, vang, acc)
    return prox, gnd, cam, vang


def _check_robot(world, robot):
    if not 0 <= robot < world.pos.shape[0]:
        raise InvalidArgument(f"no robot {robot}")


def sense(world, robot):
    """Full readings of robot ``robot`` in the current world snapshot."""
    _check_robot(world, robot)
    return SensorReadings.from_arrays(*_sense_arrays(world), i=robot)


def sense_proximity(world, robot):
    return sense(world, robot).prox


def sense_ground(world, robot):
    return sense(world, robot).gnd


def sense_camera(world, robot):
    r = sense(world, robot)
    return r.cam, r.v_color
