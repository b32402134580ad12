"""A first tour of the cGA engine.

The compact GA keeps one frequency per bit, samples two offspring each
iteration, and nudges every disagreeing frequency by 1/mu toward the winner,
clamping into [1/n, 1-1/n].  Frequencies live on the exact grid
F_mu = {1/n + i/mu}, stored as integer indices, so nothing ever drifts off
the reachable set.
"""

import numpy as np

import cga_lab as cl

# mu must make (1 - 2/n) mu an even integer; round_up finds the next valid value
params = cl.make_params(n=30, requested_mu=40, policy="round_up",
                        max_iterations=50_000, seed=7,
                        record_trace=True, trace_stride=100)
print(f"n={params.n}, requested mu=40 -> valid mu={params.mu}, n_mu={params.n_mu}")
print("first/last reachable frequencies:",
      cl.frequency_set(params)[0], cl.frequency_set(params)[-1])

# A jump landscape: OneMax plus a width-(k-1) valley just below the optimum.
fitness = cl.jump(params.n, k=4)
print("\nfitness by one-count near the top:",
      {j: fitness.value_at_level(j) for j in range(24, 31)})

result = cl.run_cga(params, fitness)
print(f"\nhit optimum: {result.hit_optimum} after {result.iterations_used} iterations "
      f"({result.samples_used} fitness evaluations), final D = {result.final_D:.3f}")

# The trace records D_t = n - ||f_t||_1, the minimum frequency, and cumulative
# gap hits / boundary clamps.  D_t starts at n/2 and is pulled toward 0.
tr = result.trace
print("\n t      D_t    min freq   gap hits  caps_low")
for i in range(0, len(tr), max(len(tr) // 10, 1)):
    print(f"{tr.t[i]:>5} {tr.D[i]:>8.3f} {tr.fmin[i]:>9.3f} {tr.gap_hits[i]:>9} "
          f"{tr.caps_low[i]:>9}")

tr.to_jsonl("run_trace.jsonl")
print("\nfull trace written to run_trace.jsonl (one JSON record per traced iteration)")

# Single steps are available too, with exact clamp bookkeeping.
fv = cl.FrequencyVector.initial(params)
rng = cl.Rng(123)
fv2, outcome = cl.cga_step(fv, fitness, params, rng)
moved = np.flatnonzero(fv2.indices != fv.indices)
print(f"\none manual step: winner_first={outcome.winner_first}, "
      f"{moved.size} frequencies moved, "
      f"sum delta before clamping = {outcome.pre_clamp_sum_delta}")
