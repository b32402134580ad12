"""Compact genetic algorithm on jump-type landscapes.

A seeded Monte Carlo engine for the cGA with frequency boundaries, a family
of jump-like fitness landscapes, an exact Poisson-binomial oracle that turns
probabilistic bound checks into zero-tolerance tests, and parameter-less
run schedulers, plus the sweep harness tying them together.
"""

from .engine import (
    BitString,
    CgaParams,
    CgaRun,
    FrequencyVector,
    InvalidMuError,
    RunResult,
    RunTrace,
    StepOutcome,
    apply_update,
    cga_step,
    frequency_set,
    make_params,
    minmax_clamp,
    run_cga,
    sample,
    valid_mu_step,
)
from .fitness import (
    FitnessSpec,
    in_gap,
    is_subjump,
    is_superjump,
    jump,
    jump_value,
    make_subjump,
    one_max,
    onemax,
    plateau_subjump,
    spec_from_json,
    spec_to_json,
    superjump_table,
)
from .meta import doubling_restart, parallel_run
from .oracle import (
    PmfVector,
    StepExpectation,
    check_binomial_tail_bound,
    check_chernoff_sample_bounds,
    check_gap_bound,
    check_lopt,
    check_loptUB,
    estimate_droste_constant,
    exact_step_expectation,
    gap_probability,
    poisson_binomial_pmf,
    prob_distinct_norms,
    prob_sample_point,
)
from .rng import Rng, derive_replicate_seed
from .verify import run_verify_suite

__version__ = "0.1.0"
