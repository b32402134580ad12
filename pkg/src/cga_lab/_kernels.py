"""Numba kernels for the hot paths.

Everything here works on the integer-index representation of the frequency
vector: coordinate j holds index i_j with f_j = 1/n + i_j/mu, so clamping and
bookkeeping are exact integer arithmetic; floats appear only where a sampling
probability is needed.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .rng import _next_double

STATUS_BUDGET = 0
STATUS_HIT_X1 = 1
STATUS_HIT_X2 = 2
STATUS_TARGET_D = 3

# Violation counter slots for the checked run loop.
V_RANGE = 0      # index left [0..n_mu] (frequency-set closure / boundary containment)
V_NO_TOUCH = 1   # a coordinate with x1 == x2 changed
V_CAP_COUNT = 2  # capped coordinates not at a boundary with differing offspring bits
V_CAP_SUM = 3    # ||f|| - ||f'|| != (capped_low - capped_high)/mu
V_ENVELOPE = 4   # f_t outside [1/2 - t/mu, 1/2 + t/mu]
N_VIOLATION_SLOTS = 5


@njit(cache=True, nogil=True)
def sample_bits(state, freq, out):
    """Fill `out` with one Bernoulli(freq[i]) bit per coordinate; returns the one-count.

    Consumes exactly len(freq) draws from the stream.
    """
    ones = 0
    for i in range(freq.shape[0]):
        if _next_double(state) < freq[i]:
            out[i] = 1
            ones += 1
        else:
            out[i] = 0
    return ones


@njit(cache=True, nogil=True)
def run_loop(idx, state, n_mu, mu, vals, opt, gap_k,
             budget, t0, target_d, pot_c, pot_k,
             stride, trace_t, trace_d, trace_fmin, trace_gap,
             trace_lo, trace_hi, trace_y, counters, check, violations,
             stop_on_optimum):
    """Advance the cGA by up to `budget` iterations, in place.

    idx        int64[n]   frequency indices, mutated
    state      uint64[4]  rng state, mutated
    vals       float64[n+1] fitness by Hamming distance to the optimum
    opt        uint8[n]   the unique optimum
    gap_k      gap = distances 1..gap_k-1 (instrumentation only)
    t0         iterations already performed before this call
    target_d   stop once D <= target_d (negative disables)
    pot_c/pot_k  exponential potential config (pot_c <= 0 disables)
    stride     trace stride (0 disables tracing); trace_* are preallocated
    counters   int64[3]   cumulative gap hits / low caps / high caps, mutated
    check      count invariant violations per step into `violations`
    stop_on_optimum  when False, sampling the optimum is recorded but the
               run keeps iterating (the "runs forever" view)

    Returns (status, iterations_done_this_call, n_trace_rows,
    first_hit_t, first_hit_on_x1) with first_hit_t relative to this call
    (0 if the optimum was not sampled).
    """
    n = idx.shape[0]
    inv_n = 1.0 / n
    inv_mu = 1.0 / mu
    x1 = np.empty(n, dtype=np.uint8)
    x2 = np.empty(n, dtype=np.uint8)
    idx_before = np.empty(n, dtype=np.int64)
    half = n_mu // 2

    S = np.int64(0)
    for i in range(n):
        S += idx[i]

    n_rows = 0
    last_traced = np.int64(-1)
    status = STATUS_BUDGET
    t = np.int64(0)
    first_hit_t = np.int64(0)
    first_hit_on_x1 = False

    if stride > 0 and t0 == 0:
        # Row for the initial state.
        trace_t[0] = 0
        trace_d[0] = (n - 1) - S * inv_mu
        fmin = 1.0
        for i in range(n):
            f = inv_n + idx[i] * inv_mu
            if f < fmin:
                fmin = f
        trace_fmin[0] = fmin
        trace_gap[0] = counters[0]
        trace_lo[0] = counters[1]
        trace_hi[0] = counters[2]
        if pot_c > 0.0:
            d0 = (n - 1) - S * inv_mu
            arg = 0.5 * pot_k - d0
            if arg > 0.25 * pot_k:
                arg = 0.25 * pot_k
            trace_y[0] = np.exp(pot_c * arg)
        else:
            trace_y[0] = np.nan
        n_rows = 1
        last_traced = 0

    while t < budget:
        t += 1
        T = t0 + t

        if check:
            for i in range(n):
                idx_before[i] = idx[i]

        d1 = 0
        for i in range(n):
            f = inv_n + idx[i] * inv_mu
            if _next_double(state) < f:
                x1[i] = 1
            else:
                x1[i] = 0
            if x1[i] != opt[i]:
                d1 += 1
        if d1 == 0:
            if first_hit_t == 0:
                first_hit_t = t
                first_hit_on_x1 = True
            if stop_on_optimum:
                status = STATUS_HIT_X1
                break
        if 1 <= d1 < gap_k:
            counters[0] += 1

        d2 = 0
        for i in range(n):
            f = inv_n + idx[i] * inv_mu
            if _next_double(state) < f:
                x2[i] = 1
            else:
                x2[i] = 0
            if x2[i] != opt[i]:
                d2 += 1
        if d2 == 0:
            if first_hit_t == 0:
                first_hit_t = t
                first_hit_on_x1 = False
            if stop_on_optimum:
                # The hitting iteration stops at detection; no update applied.
                status = STATUS_HIT_X2
                break
        if 1 <= d2 < gap_k:
            counters[0] += 1

        winner_first = vals[d1] >= vals[d2]
        raw_delta = np.int64(0)
        caps_lo = np.int64(0)
        caps_hi = np.int64(0)
        for i in range(n):
            if x1[i] != x2[i]:
                if winner_first:
                    delta = np.int64(2) * x1[i] - 1
                else:
                    delta = np.int64(2) * x2[i] - 1
                raw_delta += delta
                new = idx[i] + delta
                if new < 0:
                    new = 0
                    caps_lo += 1
                elif new > n_mu:
                    new = n_mu
                    caps_hi += 1
                S += new - idx[i]
                idx[i] = new
        counters[1] += caps_lo
        counters[2] += caps_hi

        if check:
            lo_eligible = np.int64(0)
            hi_eligible = np.int64(0)
            clamp_sum = np.int64(0)
            for i in range(n):
                if idx[i] < 0 or idx[i] > n_mu:
                    violations[V_RANGE] += 1
                if x1[i] == x2[i] and idx[i] != idx_before[i]:
                    violations[V_NO_TOUCH] += 1
                if x1[i] != x2[i]:
                    if idx_before[i] == 0:
                        lo_eligible += 1
                    if idx_before[i] == n_mu:
                        hi_eligible += 1
                clamp_sum += idx[i] - idx_before[i]
                dev = idx[i] - half
                if dev < 0:
                    dev = -dev
                if dev > T:
                    violations[V_ENVELOPE] += 1
            if caps_lo > lo_eligible or caps_hi > hi_eligible:
                violations[V_CAP_COUNT] += 1
            if clamp_sum - raw_delta != caps_lo - caps_hi:
                violations[V_CAP_SUM] += 1

        D = (n - 1) - S * inv_mu

        if stride > 0 and T % stride == 0:
            trace_t[n_rows] = T
            trace_d[n_rows] = D
            fmin = 1.0
            for i in range(n):
                f = inv_n + idx[i] * inv_mu
                if f < fmin:
                    fmin = f
            trace_fmin[n_rows] = fmin
            trace_gap[n_rows] = counters[0]
            trace_lo[n_rows] = counters[1]
            trace_hi[n_rows] = counters[2]
            if pot_c > 0.0:
                arg = 0.5 * pot_k - D
                if arg > 0.25 * pot_k:
                    arg = 0.25 * pot_k
                trace_y[n_rows] = np.exp(pot_c * arg)
            else:
                trace_y[n_rows] = np.nan
            last_traced = T
            n_rows += 1

        if target_d >= 0.0 and D <= target_d + 1e-12:
            status = STATUS_TARGET_D
            break

    if stride > 0 and t > 0 and last_traced != t0 + t:
        T = t0 + t
        trace_t[n_rows] = T
        trace_d[n_rows] = (n - 1) - S * inv_mu
        fmin = 1.0
        for i in range(n):
            f = inv_n + idx[i] * inv_mu
            if f < fmin:
                fmin = f
        trace_fmin[n_rows] = fmin
        trace_gap[n_rows] = counters[0]
        trace_lo[n_rows] = counters[1]
        trace_hi[n_rows] = counters[2]
        if pot_c > 0.0:
            D = (n - 1) - S * inv_mu
            arg = 0.5 * pot_k - D
            if arg > 0.25 * pot_k:
                arg = 0.25 * pot_k
            trace_y[n_rows] = np.exp(pot_c * arg)
        else:
            trace_y[n_rows] = np.nan
        n_rows += 1

    return status, t, n_rows, first_hit_t, first_hit_on_x1


@njit(cache=True, nogil=True)
def one_step_distance_batch(idx, state, n_mu, mu, vals, opt, reps):
    """Monte Carlo over `reps` single cGA steps from the same start vector.

    Returns (sum, sum of squares) of the post-step frequency distance
    D = n - ||f_new||_1 and the count of steps where the winner was x1.
    """
    n = idx.shape[0]
    inv_n = 1.0 / n
    inv_mu = 1.0 / mu
    x1 = np.empty(n, dtype=np.uint8)
    x2 = np.empty(n, dtype=np.uint8)
    S0 = np.int64(0)
    for i in range(n):
        S0 += idx[i]

    acc = 0.0
    acc2 = 0.0
    first_wins = np.int64(0)
    for _ in range(reps):
        d1 = 0
        for i in range(n):
            f = inv_n + idx[i] * inv_mu
            x1[i] = 1 if _next_double(state) < f else 0
            if x1[i] != opt[i]:
                d1 += 1
        d2 = 0
        for i in range(n):
            f = inv_n + idx[i] * inv_mu
            x2[i] = 1 if _next_double(state) < f else 0
            if x2[i] != opt[i]:
                d2 += 1
        winner_first = vals[d1] >= vals[d2]
        if winner_first:
            first_wins += 1
        S = S0
        for i in range(n):
            if x1[i] != x2[i]:
                if winner_first:
                    delta = np.int64(2) * x1[i] - 1
                else:
                    delta = np.int64(2) * x2[i] - 1
                new = idx[i] + delta
                if new < 0:
                    new = 0
                elif new > n_mu:
                    new = n_mu
                S += new - idx[i]
        d_after = (n - 1) - S * inv_mu
        acc += d_after
        acc2 += d_after * d_after
    return acc, acc2, first_wins


@njit(cache=True, nogil=True)
def enumerate_step(idx, n_mu, mu, vals, opt, gap_k,
                   up_prob, down_prob):
    """Exact expectations of one cGA step by enumerating all 4^n offspring pairs.

    Fills per-bit post-clamp up/down move probabilities and returns
    (sum_drift, sum_drift_preclamp, exp_caps_low, exp_caps_high,
     gap_pair_prob, distinct_norm_prob), where sum_drift is
    E[mu*D_t - mu*D_{t+1}] and the pre-clamp variant uses f' instead of f.
    """
    n = idx.shape[0]
    inv_n = 1.0 / n
    inv_mu = 1.0 / mu
    size = 1 << n

    pm = np.empty(size, dtype=np.float64)
    dist = np.empty(size, dtype=np.int64)
    ones = np.empty(size, dtype=np.int64)
    opt_mask = np.int64(0)
    for i in range(n):
        if opt[i] == 1:
            opt_mask |= np.int64(1) << i
    for m in range(size):
        p = 1.0
        o = 0
        for i in range(n):
            f = inv_n + idx[i] * inv_mu
            if (m >> i) & 1:
                p *= f
                o += 1
            else:
                p *= 1.0 - f
        pm[m] = p
        ones[m] = o
        x = np.int64(m) ^ opt_mask
        d = 0
        for i in range(n):
            if (x >> i) & 1:
                d += 1
        dist[m] = d

    for i in range(n):
        up_prob[i] = 0.0
        down_prob[i] = 0.0
    sum_drift = 0.0
    sum_drift_pre = 0.0
    e_caps_lo = 0.0
    e_caps_hi = 0.0
    gap_pair = 0.0
    distinct = 0.0

    for m1 in range(size):
        p1 = pm[m1]
        if p1 == 0.0:
            continue
        d1 = dist[m1]
        in_gap1 = 1 <= d1 < gap_k
        for m2 in range(size):
            w = p1 * pm[m2]
            if w == 0.0:
                continue
            d2 = dist[m2]
            if in_gap1 or (1 <= d2 < gap_k):
                gap_pair += w
            if ones[m1] != ones[m2]:
                distinct += w
            if vals[d1] >= vals[d2]:
                wmask, lmask = m1, m2
            else:
                wmask, lmask = m2, m1
            diff = wmask ^ lmask
            if diff == 0:
                continue
            raw = 0
            clamped = 0
            caps_lo = 0
            caps_hi = 0
            for i in range(n):
                if (diff >> i) & 1:
                    if (wmask >> i) & 1:
                        raw += 1
                        if idx[i] == n_mu:
                            caps_hi += 1
                        else:
                            clamped += 1
                            up_prob[i] += w
                    else:
                        raw -= 1
                        if idx[i] == 0:
                            caps_lo += 1
                        else:
                            clamped -= 1
                            down_prob[i] += w
            # mu*(D_t - D_{t+1}) = S_{t+1} - S_t, an integer per outcome.
            sum_drift += w * clamped
            sum_drift_pre += w * raw
            e_caps_lo += w * caps_lo
            e_caps_hi += w * caps_hi

    return sum_drift, sum_drift_pre, e_caps_lo, e_caps_hi, gap_pair, distinct


@njit(cache=True, nogil=True)
def dp_pmf(freq):
    """Poisson-binomial pmf of the one-count by the O(n^2) convolution DP."""
    n = freq.shape[0]
    probs = np.zeros(n + 1, dtype=np.float64)
    probs[0] = 1.0
    for i in range(n):
        p = freq[i]
        q = 1.0 - p
        for j in range(i + 1, 0, -1):
            probs[j] = probs[j] * q + probs[j - 1] * p
        probs[0] *= q
    return probs


@njit(cache=True, nogil=True)
def brute_force_pmf(freq):
    """Poisson-binomial pmf by summing all 2^n outcomes (n <= 20)."""
    n = freq.shape[0]
    probs = np.zeros(n + 1, dtype=np.float64)
    for m in range(1 << n):
        p = 1.0
        o = 0
        for i in range(n):
            if (m >> i) & 1:
                p *= freq[i]
                o += 1
            else:
                p *= 1.0 - freq[i]
        probs[o] += p
    return probs
