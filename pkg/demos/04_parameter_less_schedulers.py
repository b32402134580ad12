"""Running the cGA without knowing a good population size.

The parallel-run strategy starts process i with mu = 2^(i-1) and a budget of
2^i - 1 generations, then tops every older process up by 2^(i-1) each round.
End-of-round bookkeeping is exact: every live process has spent 2^i - 1 and
the total stays below i 2^i.  Invalid mu values are rounded up to the nearest
value satisfying the even-step assumption, which is safe because the scheme's
guarantee is monotone in mu.
"""

import cga_lab as cl
from cga_lab import meta

n = 24
result = meta.parallel_run(cl.one_max(n), n, per_process_budget_cap=1 << 20,
                           master_seed=11)

print(f"success={result.success}, winning process {result.winner_process} "
      f"(mu={result.winner_mu}), total budget {result.total_budget} generations\n")

print("round process   mu  spent  cumulative status")
for row in result.log:
    print(f"{row.round:>5} {row.process:>7} {row.mu:>4} {row.spent_this_round:>6} "
          f"{row.cumulative:>10} {row.status}")

print("\nnote the mu column: nominal sizes 1, 2, 4, ... rounded up to multiples of",
      cl.valid_mu_step(n))

# The doubling-restart variant applies when a per-attempt budget is known.
print("\n--- doubling restarts, budget(mu) = mu * T ---")
res = meta.doubling_restart(cl.one_max(16), 16, T_known=2_000, master_seed=3)
for a in res.attempts:
    print(f"attempt {a.attempt}: mu={a.mu:>4} budget={a.budget:>7} "
          f"used={a.used:>6} {a.status}")
print(f"total budget {res.total_budget}, winner mu={res.winner_mu}")
