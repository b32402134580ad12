"""Parameter-less schedulers: round-based parallel runs and doubling restarts.

The parallel strategy starts process i with population size 2^(i-1) and a
budget of 2^i - 1 generations, and gives every older process another
2^(i-1) generations each round, so at the end of round i every live process
has spent exactly 2^i - 1 and the total spend is below i * 2^i.  One
generation is one cGA iteration (two fitness evaluations).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

from .engine import CgaRun, make_params
from .fitness import FitnessSpec
from .rng import Rng, derive_replicate_seed

__all__ = [
    "ProcessLogRow",
    "ParallelState",
    "ParallelResult",
    "parallel_run",
    "DoublingResult",
    "doubling_restart",
    "SyntheticProcess",
    "ThresholdProcess",
    "write_process_log_csv",
]


@dataclass
class ProcessLogRow:
    round: int
    process: int
    mu: int
    spent_this_round: int
    cumulative: int
    status: str


@dataclass
class _ProcState:
    index: int
    mu_nominal: int
    mu: int
    proc: object
    spent: int = 0
    status: str = "running"


@dataclass
class ParallelState:
    round: int = 0
    processes: list = field(default_factory=list)
    total_spent: int = 0

    def assert_budget_identities(self) -> None:
        """End-of-round invariants: each live process spent 2^i - 1, total < i 2^i."""
        i = self.round
        want = (1 << i) - 1
        for p in self.processes:
            if p.spent != want:
                raise AssertionError(
                    f"process {p.index} spent {p.spent}, expected {want} after round {i}")
        if self.total_spent != i * want:
            raise AssertionError(
                f"total spent {self.total_spent} != {i}*(2^{i}-1) after round {i}")
        if not self.total_spent < i * (1 << i):
            raise AssertionError("total budget identity violated")


@dataclass
class ParallelResult:
    success: bool
    winner_process: int | None
    winner_mu: int | None
    total_budget: int
    rounds_completed: int
    log: list
    state: ParallelState


class _EngineProcess:
    """Adapter giving a resumable cGA run the (used, hit) advance interface."""

    def __init__(self, run: CgaRun):
        self.run = run

    def advance(self, generations: int) -> tuple[int, bool]:
        before = self.run.t
        res = self.run.advance(generations)
        return self.run.t - before, res.hit_optimum


def _default_factory(problem: FitnessSpec, n: int, master_seed: int,
                     budget_cap: int) -> Callable[[int, int], tuple[object, int]]:
    def make(index: int, mu_nominal: int):
        # Algorithm choice mu = 2^(i-1) can break the even-step assumption;
        # round up to the nearest valid value (safe: guarantees are monotone
        # in mu) and report the substitution through the log's mu column.
        params = make_params(n, mu_nominal, "round_up",
                             max_iterations=max(budget_cap, 1),
                             seed=derive_replicate_seed(master_seed, index))
        return _EngineProcess(CgaRun(params, problem)), params.mu
    return make


def parallel_run(problem: FitnessSpec | None, n: int, per_process_budget_cap: int,
                 master_seed: int,
                 process_factory: Callable[[int, int], tuple[object, int]] | None = None,
                 ) -> ParallelResult:
    """Round-based parallel cGA runs with exponentially growing population sizes.

    Stops at the first sampled optimum (partial-round spending reported) or
    once a process's cumulative budget would exceed `per_process_budget_cap`,
    which returns failure with full accounting.  Process i's stream is
    derived from (master_seed, i), so the outcome does not depend on how the
    processes are scheduled.
    """
    if process_factory is None:
        if problem is None:
            raise ValueError("a problem is required without a custom factory")
        process_factory = _default_factory(problem, n, master_seed, per_process_budget_cap)

    state = ParallelState()
    log: list[ProcessLogRow] = []

    def run_chunk(p: _ProcState, generations: int, rnd: int) -> bool:
        used, hit = p.proc.advance(generations)
        p.spent += used
        state.total_spent += used
        if hit:
            p.status = "succeeded"
        log.append(ProcessLogRow(rnd, p.index, p.mu, used, p.spent, p.status))
        return hit

    i = 0
    while True:
        i += 1
        if (1 << i) - 1 > per_process_budget_cap:
            return ParallelResult(False, None, None, state.total_spent, i - 1, log, state)
        for p in state.processes:
            if run_chunk(p, 1 << (i - 1), i):
                return ParallelResult(True, p.index, p.mu, state.total_spent, i - 1, log, state)
        proc, mu = process_factory(i, 1 << (i - 1))
        p = _ProcState(index=i, mu_nominal=1 << (i - 1), mu=mu, proc=proc)
        state.processes.append(p)
        if run_chunk(p, (1 << i) - 1, i):
            return ParallelResult(True, p.index, p.mu, state.total_spent, i - 1, log, state)
        state.round = i
        state.assert_budget_identities()


@dataclass
class AttemptRow:
    attempt: int
    mu: int
    budget: int
    used: int
    status: str


@dataclass
class DoublingResult:
    success: bool
    winner_mu: int | None
    total_budget: int
    attempts: list


def doubling_restart(problem: FitnessSpec | None, n: int, T_known: int | None = None,
                     master_seed: int = 0,
                     budget_fn: Callable[[int], int] | None = None,
                     run_factory: Callable[[int, int], tuple[object, int]] | None = None,
                     max_attempts: int = 64) -> DoublingResult:
    """Restarts with mu = 1, 2, 4, ..., each attempt running its own budget.

    The per-attempt budget is budget_fn(mu) (default mu * T_known, the case
    where a runtime bound is known).  Returns failure with accounting when
    max_attempts is exhausted.
    """
    if budget_fn is None:
        if T_known is None:
            raise ValueError("either budget_fn or T_known is required")
        budget_fn = lambda mu: mu * T_known
    if run_factory is None:
        if problem is None:
            raise ValueError("a problem is required without a custom factory")

        def run_factory(attempt: int, mu_nominal: int):
            params = make_params(n, mu_nominal, "round_up",
                                 max_iterations=max(budget_fn(mu_nominal), 1),
                                 seed=derive_replicate_seed(master_seed, attempt))
            return _EngineProcess(CgaRun(params, problem)), params.mu

    attempts: list[AttemptRow] = []
    total = 0
    for a in range(max_attempts):
        mu_nominal = 1 << a
        budget = budget_fn(mu_nominal)
        proc, mu = run_factory(a, mu_nominal)
        used, hit = proc.advance(budget)
        total += used
        attempts.append(AttemptRow(a + 1, mu, budget, used, "succeeded" if hit else "failed"))
        if hit:
            return DoublingResult(True, mu, total, attempts)
    return DoublingResult(False, None, total, attempts)


class SyntheticProcess:
    """Mock process for the scheduler harness: with probability
    `success_prob` (decided once per process) it samples the optimum at the
    generation where its cumulative budget reaches mu * T, provided
    mu >= mu_tilde; otherwise it never succeeds."""

    def __init__(self, mu: int, mu_tilde: int, T: int, success_prob: float, seed: int):
        coin = Rng(seed).uniform() < success_prob
        self.ready_at = mu * T if (coin and mu >= mu_tilde) else None
        self.spent = 0

    def advance(self, generations: int) -> tuple[int, bool]:
        end = self.spent + generations
        if self.ready_at is not None and self.spent < self.ready_at <= end:
            used = self.ready_at - self.spent
            self.spent = self.ready_at
            return used, True
        self.spent = end
        return generations, False


class ThresholdProcess:
    """Mock that deterministically succeeds, using its full budget, iff mu >= mu_tilde."""

    def __init__(self, mu: int, mu_tilde: int):
        self.mu = mu
        self.mu_tilde = mu_tilde

    def advance(self, generations: int) -> tuple[int, bool]:
        return generations, self.mu >= self.mu_tilde


def write_process_log_csv(log, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["round", "process", "mu", "spent_this_round", "cumulative", "status"])
        for r in log:
            writer.writerow([r.round, r.process, r.mu, r.spent_this_round,
                             r.cumulative, r.status])
