"""Flat array form of a shepherd controller, as consumed by the kernels."""

from typing import NamedTuple

import numpy as np

from . import _kernels as K


class Program(NamedTuple):
    kind: int
    beh: np.ndarray
    beh_theta: np.ndarray
    n_tr: np.ndarray
    tr: np.ndarray
    tr_beta: np.ndarray
    weights: np.ndarray


def blank_program(kind, **arrays):
    base = dict(
        beh=np.zeros((4, 4), dtype=np.int64),
        beh_theta=np.zeros(4),
        n_tr=np.zeros(4, dtype=np.int64),
        tr=np.zeros((4, 4, 3), dtype=np.int64),
        tr_beta=np.zeros((4, 4)),
        weights=np.zeros(K.N_WEIGHTS),
    )
    base.update(arrays)
    return Program(kind, **base)
