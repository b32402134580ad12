"""The compact genetic algorithm engine.

Frequencies are stored as exact integer indices into the reachable set
F_mu = {1/n + i/mu : i in [0..n_mu]}, n_mu = (1 - 2/n) mu, so no run can
drift out of F_mu; floats are derived views used only for sampling.  One
iteration samples two offspring, moves each differing frequency by 1/mu
toward the winner (ties keep the first sample), and clamps the result to
[1/n, 1 - 1/n].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels
from .fitness import FitnessSpec
from .rng import Rng, derive_replicate_seed

__all__ = [
    "CgaParams",
    "InvalidMuError",
    "make_params",
    "valid_mu_step",
    "frequency_set",
    "minmax_clamp",
    "FrequencyVector",
    "BitString",
    "StepOutcome",
    "RunTrace",
    "RunResult",
    "sample",
    "apply_update",
    "cga_step",
    "run_cga",
    "CgaRun",
    "derive_replicate_seed",
]


class InvalidMuError(ValueError):
    """The requested population size breaks the even-step frequency assumption."""


def valid_mu_step(n: int) -> int:
    """Spacing of the valid mu values for dimension n.

    mu is valid iff (1 - 2/n) mu is an even integer, i.e. mu (n-2) = 0
    mod 2n; the valid set is exactly the positive multiples of this step.
    """
    if n < 4:
        raise ValueError(f"n={n} too small; boundaries degenerate below n=4")
    return 2 * n // math.gcd(2 * n, n - 2)


@dataclass(frozen=True)
class CgaParams:
    n: int
    mu: int
    max_iterations: int = 10_000
    seed: int = 0
    record_trace: bool = False
    trace_stride: int = 1

    def __post_init__(self):
        if self.n < 4:
            raise ValueError(f"n={self.n} too small; boundaries degenerate below n=4")
        if self.mu < 1:
            raise ValueError("mu must be positive")
        if self.mu * (self.n - 2) % (2 * self.n) != 0:
            raise InvalidMuError(
                f"mu={self.mu} invalid for n={self.n}: (1-2/n)*mu is not an even integer")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.trace_stride < 1:
            raise ValueError("trace_stride must be at least 1")

    @property
    def n_mu(self) -> int:
        """Number of update steps spanning [1/n, 1-1/n]; even by construction."""
        return self.mu * (self.n - 2) // self.n


def make_params(n: int, requested_mu: int, policy: str = "round_up", **kwargs) -> CgaParams:
    """Build params whose mu satisfies the even-step assumption.

    policy "round_up" returns the smallest valid mu >= requested_mu;
    "reject" raises InvalidMuError naming the nearest valid mu in each
    direction.
    """
    if requested_mu < 1:
        raise ValueError("requested_mu must be positive")
    step = valid_mu_step(n)
    if policy == "reject":
        if requested_mu % step != 0:
            down = (requested_mu // step) * step
            up = down + step
            raise InvalidMuError(
                f"mu={requested_mu} invalid for n={n}; "
                f"nearest valid: {down if down >= step else None} below, {up} above")
        mu = requested_mu
    elif policy == "round_up":
        mu = ((requested_mu + step - 1) // step) * step
    else:
        raise ValueError(f"unknown policy {policy!r}")
    return CgaParams(n=n, mu=mu, **kwargs)


def frequency_set(params: CgaParams, exact: bool = False):
    """The reachable frequencies {1/n + i/mu : i in [0..n_mu]} in increasing order."""
    if exact:
        return [Fraction(1, params.n) + Fraction(i, params.mu) for i in range(params.n_mu + 1)]
    return 1.0 / params.n + np.arange(params.n_mu + 1, dtype=np.float64) / params.mu


def minmax_clamp(lower, value, upper):
    """max(lower, min(value, upper)), lifted component-wise on arrays."""
    if np.ndim(value) == 0 and np.ndim(lower) == 0 and np.ndim(upper) == 0:
        if lower > upper:
            raise ValueError("lower bound exceeds upper bound")
        return max(lower, min(value, upper))
    lower_a, upper_a = np.asarray(lower), np.asarray(upper)
    if np.any(lower_a > upper_a):
        raise ValueError("lower bound exceeds upper bound")
    return np.minimum(np.maximum(value, lower), upper)


@dataclass(eq=False)
class FrequencyVector:
    """The cGA's probabilistic model, index representation."""

    indices: np.ndarray
    params: CgaParams

    def __post_init__(self):
        idx = np.ascontiguousarray(self.indices, dtype=np.int64)
        if idx.shape != (self.params.n,):
            raise ValueError("indices must have length n")
        if idx.min() < 0 or idx.max() > self.params.n_mu:
            raise ValueError("frequency index outside [0..n_mu]")
        self.indices = idx

    @classmethod
    def initial(cls, params: CgaParams) -> "FrequencyVector":
        # Midpoint index n_mu/2 puts every frequency exactly at 1/2.
        return cls(np.full(params.n, params.n_mu // 2, dtype=np.int64), params)

    @classmethod
    def from_values(cls, values: Sequence[float], params: CgaParams) -> "FrequencyVector":
        vals = np.asarray(values, dtype=np.float64)
        idx = np.rint((vals - 1.0 / params.n) * params.mu).astype(np.int64)
        back = 1.0 / params.n + idx / params.mu
        if not np.allclose(back, vals, rtol=0.0, atol=1e-9):
            raise ValueError("values are not members of the frequency set F_mu")
        return cls(idx, params)

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def values(self) -> np.ndarray:
        return 1.0 / self.params.n + self.indices * (1.0 / self.params.mu)

    def values_exact(self) -> list[Fraction]:
        one_over_n = Fraction(1, self.params.n)
        return [one_over_n + Fraction(int(i), self.params.mu) for i in self.indices]

    def norm1_exact(self) -> Fraction:
        return Fraction(self.params.mu + int(self.indices.sum()), self.params.mu)

    def distance_to_ones_exact(self) -> Fraction:
        return Fraction((self.n - 1) * self.params.mu - int(self.indices.sum()), self.params.mu)

    @property
    def distance_to_ones(self) -> float:
        return float(self.distance_to_ones_exact())

    @property
    def fmin(self) -> float:
        return float(1.0 / self.params.n + int(self.indices.min()) / self.params.mu)

    def copy(self) -> "FrequencyVector":
        return FrequencyVector(self.indices.copy(), self.params)


@dataclass(eq=False)
class BitString:
    """A sampled search point with cached one-count."""

    bits: np.ndarray
    ones: int = -1

    def __post_init__(self):
        self.bits = np.ascontiguousarray(self.bits, dtype=np.uint8)
        if self.ones < 0:
            self.ones = int(self.bits.sum())
        if __debug__:
            assert self.ones == int(self.bits.sum()), "cached one-count is stale"

    @classmethod
    def from_bits(cls, bits) -> "BitString":
        return cls(np.asarray(bits, dtype=np.uint8))

    @property
    def n(self) -> int:
        return self.bits.shape[0]

    def __eq__(self, other) -> bool:
        return isinstance(other, BitString) and np.array_equal(self.bits, other.bits)


@dataclass(eq=False)
class StepOutcome:
    """Bookkeeping of one update: offspring, winner, and clamp accounting."""

    x1: BitString
    x2: BitString
    winner_first: bool
    pre_clamp_sum_delta: Fraction
    clamp_correction_low: Fraction
    clamp_correction_high: Fraction
    capped_low: int
    capped_high: int


def sample(fv: FrequencyVector, rng: Rng) -> BitString:
    """Draw x with Pr[x_i = 1] = f_i independently; consumes exactly n draws."""
    out = np.empty(fv.n, dtype=np.uint8)
    ones = _kernels.sample_bits(rng.state, fv.values, out)
    return BitString(out, int(ones))


def apply_update(fv: FrequencyVector, x1: BitString, x2: BitString,
                 fitness: FitnessSpec) -> tuple["FrequencyVector", StepOutcome]:
    """The deterministic half of a cGA iteration, given both offspring."""
    params = fv.params
    winner_first = fitness.evaluate(x1) >= fitness.evaluate(x2)
    win_bits = x1.bits if winner_first else x2.bits
    differ = x1.bits != x2.bits
    delta = np.where(differ, 2 * win_bits.astype(np.int64) - 1, 0)
    raw = fv.indices + delta
    capped_low = int(np.count_nonzero(raw < 0))
    capped_high = int(np.count_nonzero(raw > params.n_mu))
    new = FrequencyVector(np.clip(raw, 0, params.n_mu), params)
    outcome = StepOutcome(
        x1=x1, x2=x2, winner_first=bool(winner_first),
        pre_clamp_sum_delta=Fraction(int(delta.sum()), params.mu),
        clamp_correction_low=Fraction(capped_low, params.mu),
        clamp_correction_high=Fraction(capped_high, params.mu),
        capped_low=capped_low, capped_high=capped_high)
    return new, outcome


def cga_step(fv: FrequencyVector, fitness: FitnessSpec, params: CgaParams,
             rng: Rng) -> tuple["FrequencyVector", StepOutcome]:
    """One full iteration: sample x1, then x2, then update with clamping."""
    if fitness.n != params.n:
        raise ValueError("fitness dimension does not match params")
    x1 = sample(fv, rng)
    x2 = sample(fv, rng)
    return apply_update(fv, x1, x2, fitness)


@dataclass
class RunTrace:
    """Per-iteration instrumentation recorded at a fixed stride."""

    t: np.ndarray
    D: np.ndarray
    fmin: np.ndarray
    gap_hits: np.ndarray
    caps_low: np.ndarray
    caps_high: np.ndarray
    Y: np.ndarray | None = None

    def __len__(self) -> int:
        return self.t.shape[0]

    def to_jsonl(self, path) -> None:
        """One record per traced iteration, fixed key order, 17 significant digits."""
        with open(path, "w") as fh:
            for i in range(len(self)):
                y = "null" if self.Y is None or np.isnan(self.Y[i]) else f"{self.Y[i]:.17g}"
                fh.write(
                    f'{{"t": {int(self.t[i])}, "D": {self.D[i]:.17g}, '
                    f'"fmin": {self.fmin[i]:.17g}, "gap_hits": {int(self.gap_hits[i])}, '
                    f'"caps_low": {int(self.caps_low[i])}, "caps_high": {int(self.caps_high[i])}, '
                    f'"Y": {y}}}\n')


@dataclass
class RunResult:
    hit_optimum: bool
    iterations_used: int
    samples_used: int
    final_D: float
    reason: str
    trace: RunTrace | None = None
    violations: np.ndarray | None = None
    # Under budget-only stopping the run continues past the optimum; these
    # record when it was first sampled (equal to the totals otherwise).
    first_hit_iteration: int | None = None
    first_hit_samples: int | None = None

    def __post_init__(self):
        assert self.iterations_used >= 0


_REASONS = {_kernels.STATUS_BUDGET: "budget",
            _kernels.STATUS_HIT_X1: "optimum",
            _kernels.STATUS_HIT_X2: "optimum",
            _kernels.STATUS_TARGET_D: "target_d"}


def _samples_for(status: int, iters: int) -> int:
    if status == _kernels.STATUS_HIT_X1:
        return 2 * iters - 1
    return 2 * iters


def run_cga(params: CgaParams, fitness: FitnessSpec, target_d: float | None = None,
            initial: FrequencyVector | None = None, potential_c: float | None = None,
            check_invariants: bool = False, budget: int | None = None,
            stopping: str = "optimum") -> RunResult:
    """Run until the declared optimum is sampled, D_t <= target_d, or the
    budget (params.max_iterations unless overridden) is exhausted.

    Both offspring of every iteration are checked against the optimum; the
    hitting iteration applies no frequency update and counts one sample if
    the first offspring hit, two otherwise.  With stopping="budget" the run
    instead keeps iterating after sampling the optimum (the algorithm
    notionally runs forever); the first hit is still recorded in
    first_hit_iteration / first_hit_samples.
    """
    if fitness.n != params.n:
        raise ValueError("fitness dimension does not match params")
    if stopping not in ("optimum", "target_d", "budget"):
        raise ValueError(f"unknown stopping rule {stopping!r}")
    if stopping == "target_d" and target_d is None:
        raise ValueError("target_d stopping needs a target value")
    run = CgaRun(params, fitness, initial=initial, target_d=target_d,
                 potential_c=potential_c, check_invariants=check_invariants,
                 stop_on_optimum=stopping != "budget")
    return run.advance(params.max_iterations if budget is None else budget)


class CgaRun:
    """A resumable cGA process; `advance` runs a bounded number of iterations.

    State (frequency indices, rng position, iteration count) persists across
    calls, so round-based schedulers can interleave many processes while each
    stays bit-identical to an uninterrupted run.
    """

    def __init__(self, params: CgaParams, fitness: FitnessSpec, seed: int | None = None,
                 initial: FrequencyVector | None = None, target_d: float | None = None,
                 potential_c: float | None = None, check_invariants: bool = False,
                 stop_on_optimum: bool = True):
        if fitness.n != params.n:
            raise ValueError("fitness dimension does not match params")
        self.params = params
        self.fitness = fitness
        self.fv = initial.copy() if initial is not None else FrequencyVector.initial(params)
        self.rng = Rng(params.seed if seed is None else seed)
        self.target_d = -1.0 if target_d is None else float(target_d)
        self.potential_c = 0.0 if potential_c is None else float(potential_c)
        self.check_invariants = check_invariants
        self.stop_on_optimum = stop_on_optimum
        self.t = 0
        self.samples_used = 0
        self.hit_optimum = False
        self.first_hit_iteration: int | None = None
        self.first_hit_samples: int | None = None
        self.counters = np.zeros(3, dtype=np.int64)
        self.violations = np.zeros(_kernels.N_VIOLATION_SLOTS, dtype=np.int64)
        self._trace_chunks: list[tuple] = []

    @property
    def stride(self) -> int:
        return self.params.trace_stride if self.params.record_trace else 0

    def advance(self, max_iterations: int) -> RunResult:
        """Run up to max_iterations more; returns the cumulative result so far."""
        if max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")
        stride = self.stride
        status = _kernels.STATUS_BUDGET
        if max_iterations > 0 and not (self.hit_optimum and self.stop_on_optimum):
            cap = max_iterations // stride + 3 if stride > 0 else 1
            tt = np.empty(cap, dtype=np.int64)
            td = np.empty(cap, dtype=np.float64)
            tf = np.empty(cap, dtype=np.float64)
            tg = np.empty(cap, dtype=np.int64)
            tl = np.empty(cap, dtype=np.int64)
            th = np.empty(cap, dtype=np.int64)
            ty = np.empty(cap, dtype=np.float64)
            t_before, samples_before = self.t, self.samples_used
            status, iters, n_rows, hit_t, hit_on_x1 = _kernels.run_loop(
                self.fv.indices, self.rng.state, self.params.n_mu, self.params.mu,
                self.fitness.values_by_distance, self.fitness.optimum_bits,
                self.fitness.k, max_iterations, self.t, self.target_d,
                self.potential_c, float(self.fitness.k), stride,
                tt, td, tf, tg, tl, th, ty, self.counters,
                self.check_invariants, self.violations, self.stop_on_optimum)
            self.t += int(iters)
            self.samples_used += _samples_for(status, int(iters))
            if hit_t > 0:
                self.hit_optimum = True
                if self.first_hit_iteration is None:
                    self.first_hit_iteration = t_before + int(hit_t)
                    self.first_hit_samples = (samples_before + 2 * (int(hit_t) - 1)
                                              + (1 if hit_on_x1 else 2))
            if stride > 0 and n_rows > 0:
                self._trace_chunks.append(
                    (tt[:n_rows].copy(), td[:n_rows].copy(), tf[:n_rows].copy(),
                     tg[:n_rows].copy(), tl[:n_rows].copy(), th[:n_rows].copy(),
                     ty[:n_rows].copy()))
        return self._result(status)

    def _result(self, status: int) -> RunResult:
        trace = None
        if self.stride > 0 and self._trace_chunks:
            cols = [np.concatenate([c[j] for c in self._trace_chunks]) for j in range(7)]
            y = None if self.potential_c <= 0.0 else cols[6]
            trace = RunTrace(cols[0], cols[1], cols[2], cols[3], cols[4], cols[5], y)
        if self.hit_optimum and self.stop_on_optimum:
            reason = "optimum"
        else:
            reason = _REASONS[status]
        return RunResult(
            hit_optimum=self.hit_optimum, iterations_used=self.t,
            samples_used=self.samples_used, final_D=self.fv.distance_to_ones,
            reason=reason, trace=trace,
            violations=self.violations if self.check_invariants else None,
            first_hit_iteration=self.first_hit_iteration,
            first_hit_samples=self.first_hit_samples)
