"""Fitness landscapes: OneMax, jump, subjump, and superjump families.

Every member implemented here is determined by the Hamming distance to its
unique optimum (for the all-ones optimum that distance is ``n - ||x||_1``),
so a spec reduces to a length-(n+1) value table indexed by that distance.
Level-asymmetric members are out of scope.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Mapping

import numpy as np

__all__ = [
    "FitnessSpec",
    "one_max",
    "jump",
    "make_subjump",
    "plateau_subjump",
    "superjump_table",
    "onemax",
    "jump_value",
    "jump_value_at_level",
    "in_gap",
    "gap_levels",
    "is_subjump",
    "is_superjump",
    "spec_to_json",
    "spec_from_json",
]


def _ones_of(x) -> tuple[np.ndarray, int]:
    bits = np.asarray(getattr(x, "bits", x), dtype=np.uint8)
    return bits, int(bits.sum())


def onemax(x) -> int:
    """Number of one-bits of x."""
    return _ones_of(x)[1]


def gap_levels(n: int, k: int) -> range:
    """One-counts inside the gap region: n-k < ||x||_1 < n."""
    return range(n - k + 1, n)


def in_gap(x, n: int, k: int) -> bool:
    """True iff x lies in the gap region of the width-k valley."""
    ones = x if isinstance(x, (int, np.integer)) else onemax(x)
    return n - k < ones < n


def jump_value_at_level(ones: int, n: int, k: int) -> int:
    """Jump fitness as a function of the one-count."""
    if not 1 <= k <= n:
        raise ValueError(f"jump size k={k} out of range [1..{n}]")
    if ones <= n - k or ones == n:
        return ones + k
    return n - ones


def jump_value(x, n: int, k: int) -> int:
    """Jump fitness of a search point: ||x||_1 + k off the gap, n - ||x||_1 inside."""
    ones = x if isinstance(x, (int, np.integer)) else onemax(x)
    return jump_value_at_level(int(ones), n, k)


@dataclass(frozen=True, eq=False)
class FitnessSpec:
    """A concrete landscape instance, evaluable in O(n) per point.

    ``values_by_distance[d]`` is the fitness of any point at Hamming
    distance d from ``optimum_bits``.  The optimum is the declared global
    maximum; runs stop only when it is sampled.  Subjump members may tie it
    inside the gap (a warning is emitted, not an error).
    """

    variant: str
    n: int
    k: int
    offset: int
    values_by_distance: np.ndarray
    optimum_bits: np.ndarray
    gap_values: tuple | None = None  # (level, value) pairs, subjump only

    def __post_init__(self):
        vals = np.asarray(self.values_by_distance, dtype=np.float64)
        if vals.shape != (self.n + 1,):
            raise ValueError("values_by_distance must have length n+1")
        opt = np.ascontiguousarray(self.optimum_bits, dtype=np.uint8)
        if opt.shape != (self.n,):
            raise ValueError("optimum_bits must have length n")
        object.__setattr__(self, "values_by_distance", vals)
        object.__setattr__(self, "optimum_bits", opt)
        if not np.all(vals[0] >= vals[1:]):
            raise ValueError("declared optimum is not a maximum of the table")
        if np.any(vals[1:] == vals[0]):
            warnings.warn(f"{self.variant} spec has gap values tying the declared optimum; "
                          "runs still stop only at the declared optimum", stacklevel=2)

    @property
    def all_ones_optimum(self) -> bool:
        return bool(np.all(self.optimum_bits == 1))

    def distance(self, x) -> int:
        bits, _ = _ones_of(x)
        return int(np.count_nonzero(bits != self.optimum_bits))

    def value_at_distance(self, d: int) -> float:
        return float(self.values_by_distance[d])

    def value_at_level(self, ones: int) -> float:
        """Fitness by one-count; only meaningful for the all-ones optimum."""
        if not self.all_ones_optimum:
            raise ValueError("level evaluation requires the all-ones optimum")
        return float(self.values_by_distance[self.n - ones])

    def evaluate(self, x) -> float:
        return float(self.values_by_distance[self.distance(x)])

    def __call__(self, x) -> float:
        return self.evaluate(x)


def one_max(n: int) -> FitnessSpec:
    d = np.arange(n + 1)
    return FitnessSpec("onemax", n, 1, 0, (n - d).astype(np.float64), np.ones(n, dtype=np.uint8))


def jump(n: int, k: int) -> FitnessSpec:
    vals = np.array([jump_value_at_level(n - d, n, k) for d in range(n + 1)], dtype=np.float64)
    return FitnessSpec("jump", n, k, k, vals, np.ones(n, dtype=np.uint8))


def make_subjump(n: int, k: int, K: int | None = None,
                 gap_value_fn: Callable[[int], float] | Mapping[int, float] | None = None) -> FitnessSpec:
    """Subjump member: ||x||_1 + K off the gap and at the optimum, caller-chosen
    values at most n + K on the gap levels.

    Defaults reproduce the classic jump function (K = k, gap value n - ||x||_1).
    """
    if not 1 <= k <= n:
        raise ValueError(f"jump size k={k} out of range [1..{n}]")
    if K is None:
        K = k
    if gap_value_fn is None:
        gap_value_fn = lambda ones: n - ones
    get = gap_value_fn.__getitem__ if isinstance(gap_value_fn, Mapping) else gap_value_fn

    vals = np.empty(n + 1, dtype=np.float64)
    gap_pairs = []
    for d in range(n + 1):
        ones = n - d
        if ones <= n - k or ones == n:
            vals[d] = ones + K
        else:
            v = float(get(ones))
            if v > n + K:
                raise ValueError(
                    f"gap value {v} at level {ones} exceeds n+K={n + K}; not a subjump member")
            vals[d] = v
            gap_pairs.append((ones, v))
    return FitnessSpec("subjump", n, k, K, vals, np.ones(n, dtype=np.uint8),
                       gap_values=tuple(gap_pairs))


def plateau_subjump(n: int, k: int, K: int | None = None) -> FitnessSpec:
    """Subjump member with a flat gap at the level-(n-k) fitness."""
    if K is None:
        K = k
    return make_subjump(n, k, K, lambda ones: n - k + K)


def superjump_table(n: int, k: int, values_by_distance, optimum_bits=None) -> FitnessSpec:
    """Superjump member from an explicit distance-value table.

    The constructor enforces the defining conditions: the optimum is the
    strict unique maximum and fitness strictly increases with distance
    across r in [1..k-1] (deception within the radius-k ball).
    """
    vals = np.asarray(values_by_distance, dtype=np.float64)
    if optimum_bits is None:
        optimum_bits = np.ones(n, dtype=np.uint8)
    spec = FitnessSpec("superjump", n, k, 0, vals, optimum_bits)
    if not is_superjump(spec, k):
        raise ValueError("table violates the superjump conditions (deception or uniqueness)")
    return spec


def is_subjump(spec: FitnessSpec, k: int) -> bool:
    """Check the subjump defining clauses level by level for jump size k."""
    if not spec.all_ones_optimum:
        return False
    n = spec.n
    off_gap = [ones for ones in range(n - k + 1)] + [n]
    base = [spec.value_at_level(ones) - ones for ones in off_gap]
    if len(set(base)) != 1:
        return False
    K = base[0]
    return all(spec.value_at_level(ones) <= n + K for ones in gap_levels(n, k))


def _is_superjump_levels(spec: FitnessSpec, k: int) -> bool:
    vals = spec.values_by_distance
    if not np.all(vals[0] > vals[1:]):
        return False
    for r in range(1, k):
        if not vals[r] < vals[r + 1]:
            return False
    return True


def _enumerate_values(spec: FitnessSpec, n: int) -> tuple[np.ndarray, np.ndarray]:
    # All 2^n points, chunked to bound memory; returns (distance, value) rows.
    dist = np.empty(1 << n, dtype=np.int64)
    shifts = np.arange(n)
    opt = spec.optimum_bits.astype(np.int64)
    for start in range(0, 1 << n, 1 << 16):
        masks = np.arange(start, min(start + (1 << 16), 1 << n), dtype=np.int64)
        bits = (masks[:, None] >> shifts) & 1
        dist[start:start + masks.shape[0]] = np.count_nonzero(bits != opt, axis=1)
    return dist, spec.values_by_distance[dist]


def _is_superjump_enumerate(spec: FitnessSpec, k: int) -> bool:
    n = spec.n
    if n > 24:
        raise ValueError("enumeration validator limited to n <= 24")
    if n <= 20:
        # Full search: unique optimum over all 2^n points plus ring comparison.
        dist, values = _enumerate_values(spec, n)
        opt_row = int(np.left_shift(spec.optimum_bits.astype(np.int64),
                                    np.arange(n)).sum())
        best = values[opt_row]
        if not np.all(np.delete(values, opt_row) < best):
            return False
        ring = {r: values[dist == r] for r in range(1, k + 2) if r <= n}
    else:
        # Enumerate only the ball of radius k (point counts explode otherwise);
        # uniqueness outside the ball falls back to the distance table.
        if sum(math.comb(n, r) for r in range(1, k + 2)) > 2_000_000:
            raise ValueError("radius-k ball too large to enumerate")
        if not np.all(spec.values_by_distance[0] > spec.values_by_distance[1:]):
            return False
        opt = spec.optimum_bits
        ring = {}
        for r in range(1, min(k + 1, n) + 1):
            vals = []
            for flips in combinations(range(n), r):
                x = opt.copy()
                x[list(flips)] ^= 1
                vals.append(spec.evaluate(x))
            ring[r] = np.asarray(vals)
    # Deception: the worst point at distance r+1 must still beat the best at r.
    for r in range(1, k):
        at_r, at_r1 = ring.get(r), ring.get(r + 1)
        if at_r is not None and at_r1 is not None and at_r.size and at_r1.size:
            if not at_r.max() < at_r1.min():
                return False
    return True


def is_superjump(spec: FitnessSpec, k: int, method: str = "levels") -> bool:
    """True iff spec has a unique optimum and is fully deceptive in a radius-k ball.

    ``levels`` evaluates the quantifier over distance classes (valid because
    every spec here is distance-determined); ``enumerate`` brute-forces all
    points for small n as an independent cross-check.
    """
    if not 1 <= k <= spec.n:
        raise ValueError(f"k={k} out of range")
    if method == "levels":
        return _is_superjump_levels(spec, k)
    if method == "enumerate":
        return _is_superjump_enumerate(spec, k)
    raise ValueError(f"unknown method {method!r}")


def spec_to_json(spec: FitnessSpec) -> str:
    doc: dict = {"variant": spec.variant, "n": spec.n, "k": spec.k, "K": spec.offset}
    if spec.variant == "subjump":
        doc["gap_values"] = {str(level): v for level, v in (spec.gap_values or ())}
    if spec.variant == "superjump":
        doc["table"] = [float(v) for v in spec.values_by_distance]
        if not spec.all_ones_optimum:
            doc["optimum"] = [int(b) for b in spec.optimum_bits]
    return json.dumps(doc)


def spec_from_json(text: str) -> FitnessSpec:
    doc = json.loads(text)
    variant, n, k = doc["variant"], int(doc["n"]), int(doc["k"])
    if variant == "onemax":
        return one_max(n)
    if variant == "jump":
        return jump(n, k)
    if variant == "subjump":
        gv = {int(level): float(v) for level, v in doc["gap_values"].items()}
        return make_subjump(n, k, int(doc["K"]), gv)
    if variant == "superjump":
        opt = doc.get("optimum")
        opt_bits = None if opt is None else np.asarray(opt, dtype=np.uint8)
        return superjump_table(n, k, doc["table"], opt_bits)
    raise ValueError(f"unknown variant {variant!r}")
