"""Loading and saving shepherd controllers, plus the built-in ones."""

from __future__ import annotations

import json
from pathlib import Path

from . import _kernels as K
from ._program import blank_program
from .errors import FormatError, InvalidArgument
from .nn import NnGenome
from .pfsm import PfsmConfig, RandomWalk

__all__ = ["BUILTINS", "Idle", "controller_from_dict", "load_controller", "save_controller"]


class Idle:
    """Shepherd that never moves and shows no color."""

    name = "idle"

    def kernel_program(self):
        return blank_program(K.CTL_IDLE)

    def to_dict(self):
        return {"format_version": 1, "type": "builtin", "name": self.name}

    def __eq__(self, other):
        return isinstance(other, Idle)

    def __hash__(self):
        return hash(self.name)

    def __repr__(self):
        return "Idle()"


BUILTINS = {"rwalk": RandomWalk, "idle": Idle}


def controller_from_dict(doc):
    if not isinstance(doc, dict):
        raise FormatError("controller document must be a JSON object")
    kind = doc.get("type")
    try:
        if kind == "pfsm":
            return PfsmConfig.from_dict(doc)
        if kind == "nn":
            return NnGenome.from_dict(doc)
        if kind == "builtin" and doc.get("name") in BUILTINS:
            return BUILTINS[doc["name"]]()
    except InvalidArgument as exc:
        raise FormatError(str(exc)) from exc
    raise FormatError(f"unknown controller type {kind!r}")


def load_controller(source):
    """Controller from a built-in name (``rwalk``, ``idle``) or a JSON file path."""
    if isinstance(source, str) and source in BUILTINS:
        return BUILTINS[source]()
    text = Path(source).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{source}: not valid JSON ({exc})") from exc
    return controller_from_dict(doc)


def save_controller(controller, path):
    Path(path).write_text(json.dumps(controller.to_dict(), indent=2) + "\n", encoding="utf-8")
