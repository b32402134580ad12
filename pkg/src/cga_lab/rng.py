"""Deterministic 64-bit random number generation.

All randomness in this package flows through a single generator type so that
a run is fully determined by its seed, no matter how replicates are scheduled
across threads.  Replicate streams are derived from a master seed with a
splitmix64-style finalizer; each stream is a xoshiro256++ generator whose
state is expanded from the derived 64-bit seed.  Bit sampling consumes one
uniform draw per bit (no rejection), so stream positions are predictable.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
# 2^-53: doubles in [0, 1) from the top 53 bits of a 64-bit word.
_INV_2_53 = 1.0 / 9007199254740992.0


@njit(cache=True, nogil=True)
def _mix13(z):
    # Stafford "mix13" finalizer, the output function of splitmix64.
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & _MASK64
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & _MASK64
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True)
def _splitmix64(state):
    state = (state + _GOLDEN) & _MASK64
    return state, _mix13(state)


@njit(cache=True, nogil=True)
def _derive_seed(master_seed, replicate_index):
    # Element `replicate_index` of the splitmix64 stream started at the
    # master seed.  Distinct indices give decorrelated, collision-resistant
    # outputs without generating the intermediate elements.
    state = (master_seed + (replicate_index + np.uint64(1)) * _GOLDEN) & _MASK64
    return _mix13(state)


def derive_replicate_seed(master_seed: int, replicate_index: int) -> int:
    """Mix (master_seed, replicate_index) into a 64-bit stream seed.

    Pure function of its arguments: the same pair gives the same seed in
    every run and under any degree of parallelism.
    """
    if replicate_index < 0:
        raise ValueError("replicate_index must be non-negative")
    return int(_derive_seed(np.uint64(master_seed & 0xFFFFFFFFFFFFFFFF), np.uint64(replicate_index)))


@njit(cache=True, nogil=True)
def _init_state(seed):
    # Standard xoshiro seeding: expand the 64-bit seed through splitmix64.
    state = np.empty(4, dtype=np.uint64)
    s = seed
    nonzero = False
    for i in range(4):
        s, out = _splitmix64(s)
        state[i] = out
        if out != np.uint64(0):
            nonzero = True
    if not nonzero:
        state[0] = _GOLDEN
    return state


@njit(cache=True, nogil=True)
def _rotl(x, k):
    return ((x << k) | (x >> (np.uint64(64) - k))) & _MASK64


@njit(cache=True, nogil=True)
def _next_u64(state):
    # xoshiro256++ step (Blackman & Vigna); period 2^256 - 1.
    result = (_rotl((state[0] + state[3]) & _MASK64, np.uint64(23)) + state[0]) & _MASK64
    t = (state[1] << np.uint64(17)) & _MASK64
    state[2] ^= state[0]
    state[3] ^= state[1]
    state[1] ^= state[2]
    state[0] ^= state[3]
    state[2] ^= t
    state[3] = _rotl(state[3], np.uint64(45))
    return result


@njit(cache=True, nogil=True)
def _next_double(state):
    return (_next_u64(state) >> np.uint64(11)) * _INV_2_53


@njit(cache=True, nogil=True)
def _fill_uniform(state, out):
    for i in range(out.shape[0]):
        out[i] = _next_double(state)


class Rng:
    """Seeded xoshiro256++ stream producing uniforms in [0, 1)."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = _init_state(np.uint64(seed & 0xFFFFFFFFFFFFFFFF))

    def uniform(self, size: int | None = None):
        """One double, or an array of `size` doubles, uniform on [0, 1)."""
        if size is None:
            return float(_next_double(self.state))
        out = np.empty(size, dtype=np.float64)
        _fill_uniform(self.state, out)
        return out

    def integers(self, upper: int) -> int:
        """Uniform integer in [0, upper). Uses one draw."""
        if upper <= 0:
            raise ValueError("upper must be positive")
        return min(int(_next_double(self.state) * upper), upper - 1)

    def spawn(self, index: int) -> "Rng":
        """Independent child stream keyed by (current stream's next word, index)."""
        return Rng(derive_replicate_seed(int(_next_u64(self.state)), index))
