"""Counter-based splitmix64 generator shared by Python code and numba kernels.

The state is a two-element ``uint64`` array ``[key, counter]``. Draw ``n`` is
``mix(key + n * GAMMA)``, so a stream is fully described by its seed and
position and produces the same sequence on every platform.
"""

import hashlib

import numba as nb
import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0

MASK64 = (1 << 64) - 1


@nb.njit(cache=True, nogil=True)
def next_u64(state):
    state[1] += _ONE
    z = state[0] + state[1] * GAMMA
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@nb.njit(cache=True, nogil=True)
def next_float(state):
    """Uniform double in [0, 1) with 53 random bits."""
    return float(next_u64(state) >> _S11) * _INV53


@nb.njit(cache=True, nogil=True)
def next_normal(state):
    # Box-Muller, cosine branch only: one normal per two uniforms keeps the
    # draw count per call fixed.
    u1 = 1.0 - next_float(state)
    u2 = next_float(state)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


@nb.njit(cache=True, nogil=True)
def next_below(state, n):
    """Uniform integer in [0, n)."""
    return int(next_float(state) * n)


@nb.njit(cache=True, nogil=True)
def fill_floats(state, out):
    for i in range(out.shape[0]):
        out[i] = next_float(state)


def derive_seed(seed, *labels):
    """Hash a parent seed and a label path into an independent 64-bit seed."""
    text = "/".join([str(int(seed) & MASK64)] + [str(label) for label in labels])
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class RngStream:
    """Seeded, counter-based random stream.

    Parameters
    ----------
    seed : int
        Any integer; reduced modulo 2**64.
    counter : int, default 0
        Number of draws already consumed.
    """

    def __init__(self, seed, counter=0):
        self.seed = int(seed) & MASK64
        self.state = np.array([self.seed, int(counter) & MASK64], dtype=np.uint64)

    @property
    def counter(self):
        return int(self.state[1])

    def __repr__(self):
        return f"RngStream(seed={self.seed}, counter={self.counter})"

    def copy(self):
        return RngStream(self.seed, self.counter)

    def spawn(self, *labels):
        """Independent child stream keyed by ``labels``; does not advance this stream."""
        return RngStream(derive_seed(self.seed, *labels))

    def u64(self):
        return int(next_u64(self.state))

    def random(self):
        return float(next_float(self.state))

    def uniform(self, low=0.0, high=1.0):
        return low + (high - low) * float(next_float(self.state))

    def normal(self, mean=0.0, sigma=1.0):
        return mean + sigma * float(next_normal(self.state))

    def integers(self, low, high=None):
        """Uniform integer in [low, high); with one argument, in [0, low)."""
        if high is None:
            low, high = 0, low
        if high <= low:
            raise ValueError("empty integer range")
        return low + int(next_below(self.state, high - low))

    def choice(self, seq):
        return seq[self.integers(len(seq))]

    def random_array(self, n):
        out = np.empty(int(n), dtype=np.float64)
        fill_floats(self.state, out)
        return out
