"""Randomized-but-seeded sweeps that turn the bound checks into a test suite.

Each sweep draws admissible cases from a deterministic stream, evaluates one
inequality with the exact oracle on both sides, and emits rows
(lemma, case_id, lhs, rhs, holds).  A single False `holds` anywhere fails
the suite; there is no statistical tolerance.
"""

from __future__ import annotations

import csv
import math
from typing import Callable, Iterable

import numpy as np

from . import oracle
from .engine import BitString, FrequencyVector, apply_update, make_params
from .fitness import jump, one_max
from .rng import Rng, derive_replicate_seed

__all__ = [
    "sweep_binomial_tail",
    "sweep_point_prob_upper",
    "sweep_point_prob_lower",
    "sweep_distinct_norms",
    "sweep_onecount_tails",
    "sweep_gap_bound",
    "sweep_per_bit_drift",
    "sweep_boundary_clamp",
    "sweep_drift_decomposition",
    "run_verify_suite",
    "write_rows_csv",
]

DEFAULT_SEED = 20240911

_P_GRID = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]


def sweep_binomial_tail(n_max: int = 20, seed: int = 0) -> list[oracle.CheckResult]:
    """Pr[Bin(n,p) >= k] <= C(n,k) p^k over the full (n, k, p) grid."""
    rows = []
    for n in range(1, n_max + 1):
        for k in range(n + 1):
            for p in _P_GRID:
                rows.append(oracle.check_binomial_tail_bound(
                    n, p, k, case_id=f"n={n},k={k},p={p}"))
    return rows


def _random_freq(rng: Rng, m: int, lo: float, hi: float) -> np.ndarray:
    return lo + rng.uniform(m) * (hi - lo)


def sweep_point_prob_upper(cases: int = 1000, seed: int = 0) -> list[oracle.CheckResult]:
    rng = Rng(seed)
    rows = []
    for i in range(cases):
        n = 5 + rng.integers(46)
        f = _random_freq(rng, n, 1.0 / n, 1.0 - 1.0 / n)
        x_star = (rng.uniform(n) < 0.5).astype(np.uint8)
        rows.append(oracle.check_loptUB(f, x_star, case_id=f"#{i},n={n}"))
    return rows


def sweep_point_prob_lower(cases: int = 1000, seed: int = 0) -> list[oracle.CheckResult]:
    rng = Rng(seed)
    rows = []
    for i in range(cases):
        n = 3 + rng.integers(38)
        c = 0.05 + 0.85 * rng.uniform()
        f = _random_freq(rng, n, c, 1.0)
        rows.append(oracle.check_lopt(f, c, case_id=f"#{i},n={n},c={c:.3f}"))
    return rows


def sweep_distinct_norms(cases: int = 1000, seed: int = 0) -> list[oracle.CheckResult]:
    """Pr[||x1||_1 != ||x2||_1] >= 1/16 for f in [1/n, 1-1/n]^m, m in [n/2..n]."""
    rng = Rng(seed)
    rows = []
    for i in range(cases):
        n = 4 + rng.integers(57)
        m = (n + 1) // 2 + rng.integers(n - (n + 1) // 2 + 1)
        f = _random_freq(rng, m, 1.0 / n, 1.0 - 1.0 / n)
        lhs = oracle.prob_distinct_norms(f)
        rows.append(oracle.CheckResult("distinct_norms", f"#{i},n={n},m={m}", lhs, 1.0 / 16.0,
                                       lhs >= 1.0 / 16.0 - 1e-12))
    return rows


def sweep_onecount_tails(cases: int = 1000, seed: int = 0) -> list[oracle.CheckResult]:
    rng = Rng(seed)
    rows = []
    for i in range(cases):
        n = 5 + rng.integers(76)
        f = rng.uniform(n)
        delta = 3.0 * rng.uniform()
        delta_tilde = rng.uniform()
        rep = oracle.check_chernoff_sample_bounds(f, delta, delta_tilde, case_id=f"#{i},n={n}")
        rows.append(rep.upper)
        rows.append(rep.lower)
    return rows


def sweep_gap_bound(cases: int = 1000, seed: int = 0) -> list[oracle.CheckResult]:
    """Pr[sample in gap or optimum] <= exp(-D/8) whenever D >= 2k."""
    rng = Rng(seed)
    rows = []
    i = 0
    while i < cases:
        n = 10 + rng.integers(51)
        f = _random_freq(rng, n, 1.0 / n, 1.0 - 1.0 / n)
        D = n - float(f.sum())
        if D < 2.0:
            continue
        k = 1 + rng.integers(int(D / 2.0))
        rows.append(oracle.check_gap_bound(f, k, case_id=f"#{i},n={n},k={k},D={D:.2f}"))
        i += 1
    return rows


def sweep_per_bit_drift(cases: int = 200, n: int = 8, seed: int = 0) -> list[oracle.CheckResult]:
    """Per-bit drift on OneMax at interior frequencies versus the
    (2/11) f(1-f)/mu (sum_{j!=i} f_j(1-f_j))^(-1/2) lower bound, by exact
    enumeration; the worst bit of each case is reported."""
    rng = Rng(seed)
    fit = one_max(n)
    rows = []
    for i in range(cases):
        mu = 8 * (1 + rng.integers(2))  # valid for n=8: (3/4) mu even
        params = make_params(n, mu, "reject")
        # interior: indices in [1 .. n_mu-1], i.e. f in [1/n + 1/mu, 1-1/n-1/mu]
        idx = np.array([1 + rng.integers(params.n_mu - 1) for _ in range(n)], dtype=np.int64)
        fv = FrequencyVector(idx, params)
        exp = oracle.exact_step_expectation(fv, fit)
        f = fv.values
        fq = f * (1.0 - f)
        worst_lhs, worst_rhs = math.inf, 0.0
        for b in range(n):
            bound = (2.0 / 11.0) * fq[b] / mu * (fq.sum() - fq[b]) ** -0.5
            if exp.per_bit_drift[b] - bound < worst_lhs - worst_rhs:
                worst_lhs, worst_rhs = exp.per_bit_drift[b], bound
        rows.append(oracle.CheckResult("per_bit_drift", f"#{i},mu={mu}", worst_lhs, worst_rhs,
                                       worst_lhs >= worst_rhs - 1e-15))
    return rows


def sweep_boundary_clamp(cases: int = 500, seed: int = 0) -> list[oracle.CheckResult]:
    """Clamp accounting of a single update: at most one 1/mu correction per
    boundary coordinate whose offspring bits differ."""
    rng = Rng(seed)
    rows = []
    for i in range(cases):
        n = 6 + rng.integers(7)
        params = make_params(n, 1 + rng.integers(40), "round_up")
        idx = np.array([rng.integers(params.n_mu + 1) for _ in range(n)], dtype=np.int64)
        # Push some coordinates onto the boundaries so clamping actually occurs.
        for b in range(n):
            r = rng.uniform()
            if r < 0.3:
                idx[b] = 0
            elif r < 0.6:
                idx[b] = params.n_mu
        fv = FrequencyVector(idx, params)
        x1 = BitString((rng.uniform(n) < 0.5).astype(np.uint8))
        x2 = BitString((rng.uniform(n) < 0.5).astype(np.uint8))
        _, out = apply_update(fv, x1, x2, jump(n, 2))
        differ = x1.bits != x2.bits
        lo_elig = int(np.count_nonzero((idx == 0) & differ))
        hi_elig = int(np.count_nonzero((idx == params.n_mu) & differ))
        ok_lo = (out.capped_low <= lo_elig
                 and out.clamp_correction_low * params.mu == out.capped_low)
        ok_hi = (out.capped_high <= hi_elig
                 and out.clamp_correction_high * params.mu == out.capped_high)
        rows.append(oracle.CheckResult("clamp_low", f"#{i}", out.capped_low, lo_elig, ok_lo))
        rows.append(oracle.CheckResult("clamp_high", f"#{i}", out.capped_high, hi_elig, ok_hi))
    return rows


def sweep_drift_decomposition(cases: int = 200, seed: int = 0) -> list[oracle.CheckResult]:
    """One-step drift decomposition: the exact clamp term
    E[mu D_{t+1} - mu D'_{t+1}] equals E[caps_high - caps_low] and is <= 2."""
    rng = Rng(seed)
    rows = []
    for i in range(cases):
        n = 6 + rng.integers(5)
        params = make_params(n, 1 + rng.integers(30), "round_up")
        idx = np.array([rng.integers(params.n_mu + 1) for _ in range(n)], dtype=np.int64)
        for b in range(n):
            if rng.uniform() < 0.4:
                idx[b] = 0 if rng.uniform() < 0.5 else params.n_mu
        fv = FrequencyVector(idx, params)
        k = 1 + rng.integers(max(n // 2 - 1, 1))
        exp = oracle.exact_step_expectation(fv, jump(n, k))
        consistent = (abs(exp.sum_drift - (exp.sum_drift_preclamp - exp.clamp_term)) < 1e-9
                      and abs(exp.clamp_term - (exp.exp_caps_high - exp.exp_caps_low)) < 1e-9)
        rows.append(oracle.CheckResult("drift_clamp_term", f"#{i},n={n},k={k}",
                                       exp.clamp_term, 2.0,
                                       consistent and exp.clamp_term <= 2.0 + 1e-12))
    return rows


_SWEEPS: list[tuple[str, Callable]] = [
    ("binomial_tail", lambda cases, seed: sweep_binomial_tail(
        n_max=20 if cases is None else 8, seed=seed)),
    ("point_prob_upper", lambda cases, seed: sweep_point_prob_upper(cases or 1000, seed)),
    ("point_prob_lower", lambda cases, seed: sweep_point_prob_lower(cases or 1000, seed)),
    ("distinct_norms", lambda cases, seed: sweep_distinct_norms(cases or 1000, seed)),
    ("onecount_tail", lambda cases, seed: sweep_onecount_tails(cases or 1000, seed)),
    ("gap_bound", lambda cases, seed: sweep_gap_bound(cases or 1000, seed)),
    ("per_bit_drift", lambda cases, seed: sweep_per_bit_drift(
        min(cases, 200) if cases else 200, seed=seed)),
    ("boundary_clamp", lambda cases, seed: sweep_boundary_clamp(cases or 500, seed)),
    ("drift_clamp_term", lambda cases, seed: sweep_drift_decomposition(
        min(cases, 200) if cases else 200, seed=seed)),
]


def run_verify_suite(cases: int | None = None, seed: int = DEFAULT_SEED,
                     extra_checks: Iterable[Callable[[], list]] = (),
                     out_csv=None) -> tuple[list[oracle.CheckResult], int]:
    """Run every sweep; returns (rows, number of failures).

    `cases` trims the randomized sweeps for a quick smoke pass; None runs
    the full grids.  `extra_checks` lets a harness inject additional row
    producers (used by the self-test with a deliberately broken bound).
    """
    rows: list[oracle.CheckResult] = []
    for index, (_, fn) in enumerate(_SWEEPS):
        rows.extend(fn(cases, derive_replicate_seed(seed, index)))
    for fn in extra_checks:
        rows.extend(fn())
    failures = sum(0 if r.holds else 1 for r in rows)
    if out_csv is not None:
        write_rows_csv(rows, out_csv)
    return rows, failures


def write_rows_csv(rows: Iterable[oracle.CheckResult], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lemma", "case_id", "lhs", "rhs", "holds"])
        for r in rows:
            writer.writerow([r.lemma, r.case_id, f"{r.lhs:.17g}", f"{r.rhs:.17g}",
                             "true" if r.holds else "false"])
