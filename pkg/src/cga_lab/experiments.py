"""Desk-scale experiment orchestration: scaling sweeps, counterexample demos,
potential-drift traces, and their CSV emission.

Every cell fans replicates out over a thread pool; replicate seeds come from
derive_replicate_seed, and aggregation is in replicate-index order, so the
emitted CSV is byte-identical for any thread count.
"""

from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import _kernels
from .engine import CgaParams, FrequencyVector, make_params, run_cga
from .fitness import FitnessSpec, jump, one_max, plateau_subjump
from .oracle import exact_step_expectation
from .rng import Rng, derive_replicate_seed

__all__ = [
    "ExperimentSpec",
    "CellResult",
    "UpperReport",
    "LowerReport",
    "NlognReport",
    "DominationReport",
    "PotentialReport",
    "default_spec",
    "run_cell",
    "run_upper_scaling",
    "run_lower_exponential",
    "run_nlogn_floor",
    "run_domination_demo",
    "run_potential_trace",
    "write_cells_csv",
]

DEFAULT_MASTER_SEED = 987654321

# Pilot-calibrated constants; the theory fixes only their existence.
UPPER_C_MU = 12.0          # mu >= c_mu sqrt(n) ln n
UPPER_C_T = 20.0           # iteration budget c_T mu sqrt(n)
UPPER_SUCCESS_RATE = 0.9
UPPER_SPREAD_FACTOR = 3.0
NLOGN_FLOOR = 0.5          # median / (n ln n) floor, see tests/test_acceptance.py
NLOGN_MU_ARM_FLOOR = 0.3   # median / (mu sqrt(n)) floor on the mu-scaling arm
POTENTIAL_C = 0.05
POTENTIAL_DRIFT_BOUND = 2.0

_RULE_ENV = {"sqrt": math.sqrt, "log": math.log, "log2": math.log2,
             "ceil": math.ceil, "floor": math.floor, "min": min, "max": max}


def eval_rule(expr: str, **values) -> float:
    """Evaluate a budget / mu rule, an arithmetic expression in n, mu, k."""
    return float(eval(expr, {"__builtins__": {}}, {**_RULE_ENV, **values}))


@dataclass
class ExperimentSpec:
    """Grid description for one experiment kind; see default_spec for the
    pinned configurations the acceptance suite runs."""

    kind: str
    ns: Sequence[int] = ()
    ks: Sequence[int] = ()
    mus: Sequence[int] | None = None
    mu_rule: str | None = None
    budget_rule: str = "20 * mu * sqrt(n)"
    replicates: int = 50
    master_seed: int = DEFAULT_MASTER_SEED
    fitness_variant: str = "jump"
    target_d: float | None = None
    potential_c: float = POTENTIAL_C
    iterations: int | None = None   # fixed per-replicate budget, overrides the rule
    enforce_k_hypothesis: bool = False

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind, "ns": list(self.ns), "ks": list(self.ks),
            "mus": None if self.mus is None else list(self.mus),
            "mu_rule": self.mu_rule, "budget_rule": self.budget_rule,
            "replicates": self.replicates, "master_seed": self.master_seed,
            "fitness_variant": self.fitness_variant, "target_d": self.target_d,
            "potential_c": self.potential_c, "iterations": self.iterations,
            "enforce_k_hypothesis": self.enforce_k_hypothesis,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ExperimentSpec":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**doc)


def _fitness_for(variant: str, n: int, k: int) -> FitnessSpec:
    if variant == "onemax":
        return one_max(n)
    if variant == "jump":
        return jump(n, k)
    if variant == "plateau":
        return plateau_subjump(n, k)
    raise ValueError(f"unknown fitness variant {variant!r}")


def _check_k_hypothesis(n: int, k: int, enforce: bool) -> None:
    bound = math.log(n) / 20.0 - 1.0
    if k > bound:
        msg = (f"k={k} exceeds the small-jump hypothesis floor(ln(n)/20)-1={bound:.2f} "
               f"at n={n}; desk-scale grids always do")
        if enforce:
            raise ValueError(msg)
        warnings.warn(msg, stacklevel=3)


@dataclass
class CellResult:
    n: int
    k: int
    mu: int
    budget: int
    replicates: int
    success_rate: float
    median_iterations: float
    iqr: float
    mean_final_D: float
    censored_count: int
    runtimes: np.ndarray = field(repr=False, default=None)
    hits: np.ndarray = field(repr=False, default=None)


CSV_COLUMNS = ["n", "k", "mu", "budget", "replicates", "success_rate",
               "median_iterations", "iqr", "mean_final_D", "censored_count"]


def write_cells_csv(rows: Sequence[CellResult], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow([r.n, r.k, r.mu, r.budget, r.replicates,
                             f"{r.success_rate:.17g}", f"{r.median_iterations:.17g}",
                             f"{r.iqr:.17g}", f"{r.mean_final_D:.17g}", r.censored_count])


def run_cell(n: int, k: int, mu: int, budget: int, fitness: FitnessSpec,
             replicates: int, cell_seed: int, threads: int = 1,
             target_d: float | None = None) -> CellResult:
    """Run one grid cell; censored runs enter the median at the budget value."""
    params = CgaParams(n=n, mu=mu, max_iterations=budget)

    def one(rep: int):
        p = replace(params, seed=derive_replicate_seed(cell_seed, rep))
        res = run_cga(p, fitness, target_d=target_d)
        return res.hit_optimum, res.iterations_used, res.final_D, res.reason

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(replicates)))
    else:
        results = [one(r) for r in range(replicates)]

    hits = np.array([r[0] for r in results], dtype=bool)
    iters = np.array([r[1] for r in results], dtype=np.int64)
    final_d = np.array([r[2] for r in results], dtype=np.float64)
    censored = np.array([r[3] == "budget" for r in results], dtype=bool)
    runtimes = np.where(hits, iters, budget)
    q25, q50, q75 = np.percentile(runtimes, [25.0, 50.0, 75.0])
    return CellResult(
        n=n, k=k, mu=mu, budget=budget, replicates=replicates,
        success_rate=float(hits.mean()), median_iterations=float(q50),
        iqr=float(q75 - q25), mean_final_D=float(final_d.mean()),
        censored_count=int(censored.sum()), runtimes=runtimes, hits=hits)


def _resolve_mu(n: int, spec: ExperimentSpec) -> int:
    if spec.mu_rule is None:
        raise ValueError("spec needs a mu_rule")
    requested = max(1, math.ceil(eval_rule(spec.mu_rule, n=n)))
    return make_params(n, requested, "round_up").mu


def _resolve_budget(spec: ExperimentSpec, n: int, mu: int, k: int) -> int:
    if spec.iterations is not None:
        return int(spec.iterations)
    return max(1, math.ceil(eval_rule(spec.budget_rule, n=n, mu=mu, k=k)))


@dataclass
class UpperReport:
    cells: list
    normalized_medians: dict
    spread: float  # max/min of the normalized medians

    @property
    def rows(self):
        return self.cells


def run_upper_scaling(spec: ExperimentSpec, threads: int = 1) -> UpperReport:
    """Success rates and budget-normalized medians across the n grid with
    mu = round_up(c_mu sqrt(n) ln n) and budget c_T mu sqrt(n)."""
    k = spec.ks[0]
    cells = []
    norm = {}
    for ci, n in enumerate(spec.ns):
        _check_k_hypothesis(n, k, spec.enforce_k_hypothesis)
        mu = _resolve_mu(n, spec)
        budget = _resolve_budget(spec, n, mu, k)
        fitness = _fitness_for(spec.fitness_variant, n, k)
        cell = run_cell(n, k, mu, budget, fitness, spec.replicates,
                        derive_replicate_seed(spec.master_seed, ci), threads)
        cells.append(cell)
        norm[n] = cell.median_iterations / (mu * math.sqrt(n))
    vals = list(norm.values())
    spread = max(vals) / min(vals) if min(vals) > 0 else math.inf
    return UpperReport(cells, norm, spread)


@dataclass
class LowerReport:
    cells: list
    best_by_k: dict          # k -> CellResult with the smallest median over mu
    slope: float             # OLS slope of log(runtime) on k, best-mu cells
    p_value: float           # permutation test, replicate-level labels
    monotone: bool           # best-over-mu medians strictly increasing in k

    @property
    def rows(self):
        return self.cells


def _permutation_p_value(ks: np.ndarray, logy: np.ndarray, observed: float,
                         seed: int, n_perm: int = 2000) -> float:
    rng = Rng(seed)
    kc = ks - ks.mean()
    denom = float((kc * kc).sum())
    hits = 0
    for _ in range(n_perm):
        order = np.argsort(rng.uniform(logy.shape[0]), kind="stable")
        slope = float((kc * (logy[order] - logy.mean())).sum()) / denom
        if slope >= observed:
            hits += 1
    return (1 + hits) / (1 + n_perm)


def run_lower_exponential(spec: ExperimentSpec, threads: int = 1) -> LowerReport:
    """Best-over-mu median runtimes per jump size k at fixed n, plus a
    regression of replicate-level log runtimes on k (censored at budget)."""
    n = spec.ns[0]
    if spec.mus is None:
        raise ValueError("lower sweep needs an explicit mu grid")
    cells = []
    best_by_k: dict[int, CellResult] = {}
    ci = 0
    for k in spec.ks:
        fitness = _fitness_for(spec.fitness_variant, n, k)
        for mu in spec.mus:
            mu_valid = make_params(n, mu, "round_up").mu
            budget = _resolve_budget(spec, n, mu_valid, k)
            cell = run_cell(n, k, mu_valid, budget, fitness, spec.replicates,
                            derive_replicate_seed(spec.master_seed, ci), threads)
            ci += 1
            cells.append(cell)
            if k not in best_by_k or cell.median_iterations < best_by_k[k].median_iterations:
                best_by_k[k] = cell
    ks_sorted = sorted(best_by_k)
    medians = [best_by_k[k].median_iterations for k in ks_sorted]
    monotone = all(a < b for a, b in zip(medians, medians[1:]))

    ks_points = np.concatenate([np.full(best_by_k[k].runtimes.shape[0], k, dtype=np.float64)
                                for k in ks_sorted])
    logy = np.concatenate([np.log(best_by_k[k].runtimes.astype(np.float64))
                           for k in ks_sorted])
    kc = ks_points - ks_points.mean()
    slope = float((kc * (logy - logy.mean())).sum() / (kc * kc).sum())
    p = _permutation_p_value(ks_points, logy, slope,
                             derive_replicate_seed(spec.master_seed, 10_000))
    return LowerReport(cells, best_by_k, slope, p, monotone)


@dataclass
class NlognReport:
    cells: list
    ratios: dict             # n -> median / (n ln n)
    monotone: bool
    floor: float
    floor_ok: bool
    mu_arm_cells: list
    mu_arm_normalized: dict  # mu -> median / (mu sqrt(n))
    mu_arm_ok: bool

    @property
    def rows(self):
        return self.cells + self.mu_arm_cells


def run_nlogn_floor(spec: ExperimentSpec, threads: int = 1,
                    mu_arm_mus: Sequence[int] | None = None) -> NlognReport:
    """Medians versus n ln n with small mu = round_up(C ln n), plus a
    mu-scaling arm at fixed n asserting the mu sqrt(n) floor for large mu."""
    k = spec.ks[0]
    cells = []
    ratios = {}
    for ci, n in enumerate(spec.ns):
        mu = _resolve_mu(n, spec)
        budget = _resolve_budget(spec, n, mu, k)
        fitness = _fitness_for(spec.fitness_variant, n, k)
        cell = run_cell(n, k, mu, budget, fitness, spec.replicates,
                        derive_replicate_seed(spec.master_seed, ci), threads)
        cells.append(cell)
        ratios[n] = cell.median_iterations / (n * math.log(n))
    medians = [c.median_iterations for c in cells]
    monotone = all(a <= b for a, b in zip(medians, medians[1:]))
    floor_ok = all(r >= NLOGN_FLOOR for r in ratios.values())

    arm_cells = []
    arm_norm = {}
    n0 = spec.ns[0]
    fitness0 = _fitness_for(spec.fitness_variant, n0, k)
    if mu_arm_mus is None:
        base = make_params(n0, 1, "round_up").mu
        mu_arm_mus = [base * f for f in (1, 2, 4, 8)]
    for ai, mu in enumerate(mu_arm_mus):
        mu_valid = make_params(n0, mu, "round_up").mu
        budget = _resolve_budget(spec, n0, mu_valid, k)
        cell = run_cell(n0, k, mu_valid, budget, fitness0, spec.replicates,
                        derive_replicate_seed(spec.master_seed, 5_000 + ai), threads)
        arm_cells.append(cell)
        arm_norm[mu_valid] = cell.median_iterations / (mu_valid * math.sqrt(n0))
    # The floor is asserted for the larger half of the grid ("for large mu").
    large = sorted(arm_norm)[len(arm_norm) // 2:]
    arm_ok = all(arm_norm[m] >= NLOGN_MU_ARM_FLOOR for m in large)
    return NlognReport(cells, ratios, monotone, NLOGN_FLOOR, floor_ok,
                       arm_cells, arm_norm, arm_ok)


@dataclass
class DominationArm:
    arm: str
    n: int
    mu: int
    replicates: int
    mean_d: float
    sd: float
    ci_lo: float
    ci_hi: float


@dataclass
class DominationReport:
    mc_subjump: DominationArm
    mc_onemax: DominationArm
    separated: bool           # subjump CI strictly below the onemax CI
    exact_n: int
    exact_mu: int
    prob_up_f: float          # Pr[f~_1 = 1/2 + 1/mu], step from (1/2, 1/n, ...)
    prob_up_g: float          # same for the all-1/2 vector on OneMax
    exact_direction_ok: bool  # prob_up_f > prob_up_g
    reference_bound_f: float  # 1/4 + 1/(4 e^2), the asymptotic floor for f

    def arm_rows(self):
        return [self.mc_subjump, self.mc_onemax]


def _one_step_arm(arm: str, fv: FrequencyVector, fitness: FitnessSpec,
                  replicates: int, seed: int) -> DominationArm:
    rng = Rng(seed)
    acc, acc2, _ = _kernels.one_step_distance_batch(
        fv.indices, rng.state, fv.params.n_mu, fv.params.mu,
        fitness.values_by_distance, fitness.optimum_bits, replicates)
    mean = acc / replicates
    var = max(acc2 / replicates - mean * mean, 0.0)
    sd = math.sqrt(var)
    half = 3.0 * sd / math.sqrt(replicates)
    return DominationArm(arm, fv.params.n, fv.params.mu, replicates,
                         mean, sd, mean - half, mean + half)


def run_domination_demo(spec: ExperimentSpec, threads: int = 1) -> DominationReport:
    """Both counterexamples to OneMax-domination.

    Monte Carlo: expected post-step distance from f = 1/2 ones under a
    subjump step, versus from the boundary-adjacent g under a OneMax step
    (mu = n); the first must come out strictly smaller.  Exact: the
    probability that the first frequency rises, for (1/2, 1/n, ..., 1/n) on
    a subjump versus all-1/2 on OneMax, by full pair enumeration.
    """
    n = spec.ns[0]
    if n % 2 != 0:
        raise ValueError("domination demo needs even n")
    params = make_params(n, n, "reject")
    f_half = FrequencyVector.initial(params)
    subjump = jump(n, max(n // 4, 1))

    g_idx = np.empty(n, dtype=np.int64)
    g_idx[: n // 2] = 1
    g_idx[n // 2:] = params.n_mu - 1
    g_vec = FrequencyVector(g_idx, params)

    arm_f = _one_step_arm("subjump_from_half", f_half, subjump, spec.replicates,
                          derive_replicate_seed(spec.master_seed, 0))
    arm_g = _one_step_arm("onemax_from_boundary_adjacent", g_vec, one_max(n),
                          spec.replicates, derive_replicate_seed(spec.master_seed, 1))
    separated = arm_f.ci_hi < arm_g.ci_lo

    n_x, mu_x, k_x = 10, 5, 3
    params_x = make_params(n_x, mu_x, "reject")
    idx_f = np.zeros(n_x, dtype=np.int64)
    idx_f[0] = params_x.n_mu // 2
    fv_f = FrequencyVector(idx_f, params_x)
    exp_f = exact_step_expectation(fv_f, jump(n_x, k_x))
    exp_g = exact_step_expectation(FrequencyVector.initial(params_x), one_max(n_x))
    prob_f = float(exp_f.per_bit_up_prob[0])
    prob_g = float(exp_g.per_bit_up_prob[0])
    return DominationReport(
        mc_subjump=arm_f, mc_onemax=arm_g, separated=separated,
        exact_n=n_x, exact_mu=mu_x, prob_up_f=prob_f, prob_up_g=prob_g,
        exact_direction_ok=prob_f > prob_g,
        reference_bound_f=0.25 + 0.25 * math.exp(-2.0))


def write_domination_csv(report: DominationReport, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["arm", "n", "mu", "replicates", "mean_d", "sd", "ci_lo", "ci_hi"])
        for a in report.arm_rows():
            writer.writerow([a.arm, a.n, a.mu, a.replicates, f"{a.mean_d:.17g}",
                             f"{a.sd:.17g}", f"{a.ci_lo:.17g}", f"{a.ci_hi:.17g}"])
        writer.writerow(["exact_prob_up_f", report.exact_n, report.exact_mu, 0,
                         f"{report.prob_up_f:.17g}", "", "", ""])
        writer.writerow(["exact_prob_up_g", report.exact_n, report.exact_mu, 0,
                         f"{report.prob_up_g:.17g}", "", "", ""])


@dataclass
class PotentialBin:
    d_bin: int
    count: int
    mean_dY: float
    se_dY: float


@dataclass
class PotentialReport:
    n: int
    k: int
    c: float
    mu: int
    iterations: int
    replicates: int
    bins: list
    bound: float
    holds: bool  # mean <= bound + 3 se in every bin with >= 500 observations

    @property
    def rows(self):
        return self.bins


def run_potential_trace(spec: ExperimentSpec, threads: int = 1) -> PotentialReport:
    """Empirical one-step drift of the exponential potential Y_t, binned by
    D_t over the steps with Y_t below its cap (D_t > k/4)."""
    n, k, c = spec.ns[0], spec.ks[0], spec.potential_c
    if not 0.0 < c <= 1.0:
        raise ValueError("potential constant c must lie in (0, 1]")
    mu = _resolve_mu(n, spec)
    iters = spec.iterations or 20_000
    params = CgaParams(n=n, mu=mu, max_iterations=iters, record_trace=True, trace_stride=1)
    fitness = _fitness_for(spec.fitness_variant, n, k)

    def one(rep: int):
        p = replace(params, seed=derive_replicate_seed(spec.master_seed, rep))
        res = run_cga(p, fitness, potential_c=c)
        tr = res.trace
        d = tr.D[:-1]
        dy = np.diff(tr.Y)
        live = d > k / 4.0  # Y_t < Y_max exactly when D_t > k/4
        bins = np.floor(d[live]).astype(np.int64)
        counts = np.bincount(bins, minlength=n + 1)
        sums = np.bincount(bins, weights=dy[live], minlength=n + 1)
        sqs = np.bincount(bins, weights=dy[live] ** 2, minlength=n + 1)
        return counts, sums, sqs

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(one, range(spec.replicates)))
    else:
        parts = [one(r) for r in range(spec.replicates)]

    counts = np.zeros(n + 1, dtype=np.int64)
    sums = np.zeros(n + 1, dtype=np.float64)
    sqs = np.zeros(n + 1, dtype=np.float64)
    for cnt, s, q in parts:  # replicate order: deterministic float reduction
        counts += cnt
        sums += s
        sqs += q

    bins = []
    holds = True
    for b in range(n + 1):
        if counts[b] == 0:
            continue
        m = sums[b] / counts[b]
        var = max(sqs[b] / counts[b] - m * m, 0.0)
        se = math.sqrt(var / counts[b])
        bins.append(PotentialBin(b, int(counts[b]), m, se))
        if counts[b] >= 500 and not m <= POTENTIAL_DRIFT_BOUND + 3.0 * se:
            holds = False
    return PotentialReport(n, k, c, mu, iters, spec.replicates, bins,
                           POTENTIAL_DRIFT_BOUND, holds)


def write_potential_csv(report: PotentialReport, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["d_bin", "count", "mean_dY", "se_dY", "bound"])
        for b in report.bins:
            writer.writerow([b.d_bin, b.count, f"{b.mean_dY:.17g}", f"{b.se_dY:.17g}",
                             f"{report.bound:.17g}"])


def default_spec(kind: str, quick: bool = False) -> ExperimentSpec:
    """The pinned grids the acceptance criteria run (quick trims them)."""
    if kind == "upper_scaling":
        return ExperimentSpec(
            kind=kind, ns=[64, 128] if quick else [100, 200, 400], ks=[3],
            mu_rule=f"{UPPER_C_MU} * sqrt(n) * log(n)",
            budget_rule=f"{UPPER_C_T} * mu * sqrt(n)",
            replicates=10 if quick else 50)
    if kind == "lower_exponential":
        # eight valid mu values (multiples of 25 at n=50) spanning [8, 1024]
        return ExperimentSpec(
            kind=kind, ns=[50], ks=[2, 4] if quick else [2, 4, 6, 8],
            mus=[25, 75, 275] if quick else [25, 50, 75, 100, 150, 275, 525, 1025],
            iterations=100_000 if quick else 1_000_000,
            replicates=5 if quick else 20)
    if kind == "nlogn_floor":
        return ExperimentSpec(
            kind=kind, ns=[64, 128] if quick else [128, 256, 512], ks=[2],
            mu_rule="12 * log(n)",
            budget_rule=f"{UPPER_C_T} * mu * sqrt(n)",
            replicates=8 if quick else 30)
    if kind == "domination_demo":
        return ExperimentSpec(
            kind=kind, ns=[200], ks=[50],
            replicates=10_000 if quick else 100_000)
    if kind == "potential_trace":
        return ExperimentSpec(
            kind=kind, ns=[50], ks=[8],
            mu_rule=f"{UPPER_C_MU} * sqrt(n) * log(n)",
            iterations=5_000 if quick else 20_000,
            replicates=10 if quick else 50)
    raise ValueError(f"unknown experiment kind {kind!r}")
