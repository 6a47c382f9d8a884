"""Argument checks shared by the estimators, the campaign runner and the CLI."""

from __future__ import annotations

import numbers

from ._rng import MASK64
from .errors import InvalidArgument
from .missions import ScenarioSpec, build_scenario


def check_scenario(x):
    """Accept a ScenarioSpec, a ``(mission, sheep)`` pair or a ``"mission-sheep"`` name."""
    if isinstance(x, ScenarioSpec):
        return x
    if isinstance(x, str):
        parts = x.replace("_", "-").split("-")
        if len(parts) != 2:
            raise InvalidArgument(f"scenario name must look like 'herding-c2', got {x!r}")
        return build_scenario(*parts)
    if isinstance(x, (tuple, list)) and len(x) == 2:
        return build_scenario(*x)
    raise InvalidArgument(f"cannot interpret {x!r} as a scenario")


def check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, numbers.Integral):
        raise InvalidArgument(f"seed must be an integer, got {seed!r}")
    return int(seed) & MASK64


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < minimum:
        raise InvalidArgument(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_probability(value, name):
    v = float(value)
    if not 0.0 < v < 1.0:
        raise InvalidArgument(f"{name} must lie in (0, 1), got {value!r}")
    return v
