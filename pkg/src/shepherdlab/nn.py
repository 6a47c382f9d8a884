"""Single-layer feed-forward network controller and its genome."""

from __future__ import annotations

import numpy as np

from . import _kernels as K
from ._program import blank_program
from .core import ColorSignal
from .errors import FormatError, InvalidArgument
from .rm3 import Actuation

__all__ = ["N_INPUTS", "N_OUTPUTS", "N_WEIGHTS", "NnGenome", "encode_inputs", "forward", "mutate_genome"]

N_INPUTS = K.N_IN
N_OUTPUTS = K.N_OUT
N_WEIGHTS = K.N_WEIGHTS
WEIGHT_BOUND = 5.0
NN_FORMAT_VERSION = 1
MUTATION_PROB = 0.1
MUTATION_SIGMA = 1.0


class NnGenome:
    """192 weights in [-5, 5]; weight ``b * 24 + a`` links input ``a`` to output ``b``.

    Out-of-range values are clamped; non-finite values and wrong lengths are
    rejected.
    """

    __slots__ = ("weights",)

    def __init__(self, weights):
        w = np.array(weights, dtype=np.float64).ravel()
        if w.shape != (N_WEIGHTS,):
            raise InvalidArgument(f"a genome has exactly {N_WEIGHTS} weights, got {w.size}")
        if not np.all(np.isfinite(w)):
            raise InvalidArgument("weights must be finite")
        np.clip(w, -WEIGHT_BOUND, WEIGHT_BOUND, out=w)
        w.setflags(write=False)
        self.weights = w

    @classmethod
    def zeros(cls):
        return cls(np.zeros(N_WEIGHTS))

    @classmethod
    def random(cls, rng):
        return cls(rng.random_array(N_WEIGHTS) * (2 * WEIGHT_BOUND) - WEIGHT_BOUND)

    def matrix(self):
        """Weights as an (outputs, inputs) matrix."""
        return self.weights.reshape(N_OUTPUTS, N_INPUTS)

    def __eq__(self, other):
        return isinstance(other, NnGenome) and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.weights.tobytes())

    def __repr__(self):
        return f"NnGenome(<{N_WEIGHTS} weights>, norm={np.linalg.norm(self.weights):.3f})"

    def kernel_program(self):
        return blank_program(K.CTL_NN, weights=np.array(self.weights))

    def to_dict(self):
        return {"format_version": NN_FORMAT_VERSION, "type": "nn",
                "weights": [float(x) for x in self.weights]}

    @classmethod
    def from_dict(cls, doc):
        try:
            if int(doc.get("format_version", -1)) != NN_FORMAT_VERSION:
                raise FormatError(f"unsupported nn format_version {doc.get('format_version')!r}")
            if doc.get("type", "nn") != "nn":
                raise FormatError(f"not a network document: type {doc.get('type')!r}")
            return cls([float(x) for x in doc["weights"]])
        except FormatError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad network document: {exc}") from exc


def encode_inputs(readings):
    """24-vector: proximity, ground codes, per-color diagonal projections, bias."""
    out = np.zeros(N_INPUTS)
    K.encode_inputs_1(*readings.as_arrays(), out)
    return out


def forward(genome, inputs):
    x = np.asarray(inputs, dtype=np.float64)
    if x.shape != (N_INPUTS,):
        raise InvalidArgument(f"expected {N_INPUTS} inputs")
    outputs = np.zeros(N_OUTPUTS)
    vl, vr, led = K.nn_forward_1(genome.weights, x, outputs)
    return Actuation(float(vl), float(vr), ColorSignal(int(led)))


def mutate_genome(genome, rng):
    """Gaussian perturbation of each weight with probability 0.1; at least one changes."""
    w = np.array(genome.weights)
    while True:
        mask = rng.random_array(N_WEIGHTS) < MUTATION_PROB
        if not mask.any():
            mask[rng.integers(N_WEIGHTS)] = True
        idx = np.flatnonzero(mask)
        new = w.copy()
        for i in idx:
            new[i] = min(max(w[i] + rng.normal(0.0, MUTATION_SIGMA), -WEIGHT_BOUND), WEIGHT_BOUND)
        if np.any(new != w):
            return NnGenome(new)
