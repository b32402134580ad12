import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import cga_lab as cl
from cga_lab.engine import BitString, FrequencyVector, apply_update, minmax_clamp
from cga_lab.rng import Rng


# ---------------------------------------------------------------- minmax


def test_minmax_clamp_scalar_cases():
    assert minmax_clamp(0.1, 0.05, 0.9) == 0.1
    assert minmax_clamp(0.1, 0.5, 0.9) == 0.5
    assert minmax_clamp(0.1, 0.95, 0.9) == 0.9


def test_minmax_clamp_vector_lift():
    out = minmax_clamp(0.1, np.array([0.05, 0.5, 0.95]), 0.9)
    np.testing.assert_allclose(out, [0.1, 0.5, 0.9])


def test_minmax_clamp_bad_bounds():
    with pytest.raises(ValueError):
        minmax_clamp(1.0, 0.5, 0.0)


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
@settings(max_examples=200, deadline=None)
def test_minmax_clamp_properties(lo, v, hi):
    if lo > hi:
        lo, hi = hi, lo
    out = minmax_clamp(lo, v, hi)
    assert lo <= out <= hi
    assert minmax_clamp(lo, out, hi) == out


# ---------------------------------------------------------------- sampling


def test_sample_consumes_exactly_n_draws(params10):
    fv = cl.FrequencyVector.initial(params10)
    r1 = Rng(42)
    cl.sample(fv, r1)
    r2 = Rng(42)
    r2.uniform(params10.n)
    assert r1.uniform() == r2.uniform()


def test_sample_matches_threshold_rule(params10):
    # bit i is one exactly when the i-th draw is below f_i
    fv = cl.FrequencyVector.from_values([0.1, 0.9, 0.5, 0.5, 0.7, 0.3, 0.1, 0.9, 0.5, 0.5],
                                        params10)
    x = cl.sample(fv, Rng(123))
    u = Rng(123).uniform(10)
    np.testing.assert_array_equal(x.bits, (u < fv.values).astype(np.uint8))
    assert x.ones == int(x.bits.sum())


def test_sample_all_ones_probability_at_boundary(params10):
    # f all at 1 - 1/n: Pr[all ones] = 0.9^10, from the product oracle
    fv = cl.FrequencyVector(np.full(10, params10.n_mu, dtype=np.int64), params10)
    expected = 0.9**10
    assert abs(expected - 0.34867844010000004) < 1e-15
    assert abs(cl.prob_sample_point(fv.values, np.ones(10, dtype=np.uint8)) - expected) < 1e-12
    reps = 200_000
    rng = Rng(7)
    hits = sum(1 for _ in range(reps) if cl.sample(fv, rng).ones == 10)
    se = math.sqrt(expected * (1 - expected) / reps)
    assert abs(hits / reps - expected) < 4 * se


def test_sample_mean_at_half():
    p = cl.make_params(64, 64, "round_up", seed=0)
    fv = cl.FrequencyVector.initial(p)
    rng = Rng(99)
    reps = 100_000
    total = sum(cl.sample(fv, rng).ones for _ in range(reps))
    mean = total / reps
    sigma = math.sqrt(64 * 0.25 / reps)
    assert abs(mean - 32.0) < 3 * sigma


# ---------------------------------------------------------------- stepping


def test_update_moves_winner_coordinate(params10):
    fv = cl.FrequencyVector.initial(params10)
    x1 = BitString.from_bits([1, 1, 0, 1, 0, 1, 0, 1, 0, 1])
    x2 = BitString.from_bits([0, 1, 0, 1, 0, 1, 0, 1, 0, 1])  # differs only in bit 1
    new, out = apply_update(fv, x1, x2, cl.one_max(10))
    assert out.winner_first  # onemax(x1) = onemax(x2) + 1
    assert new.values_exact()[0] == Fraction(7, 10)
    assert new.values_exact()[1:] == [Fraction(1, 2)] * 9
    assert out.pre_clamp_sum_delta == Fraction(1, 5)
    assert out.capped_low == out.capped_high == 0


def test_update_identical_offspring_is_noop(params10):
    fv = cl.FrequencyVector.initial(params10)
    x = BitString.from_bits([1, 0, 1, 0, 1, 0, 1, 0, 1, 0])
    new, out = apply_update(fv, x, x, cl.jump(10, 3))
    assert np.array_equal(new.indices, fv.indices)
    assert out.pre_clamp_sum_delta == 0


def test_update_clamps_at_lower_boundary(params10):
    idx = np.full(10, 2, dtype=np.int64)
    idx[0] = 0  # f_1 = 1/n
    fv = cl.FrequencyVector(idx, params10)
    x1 = BitString.from_bits([0, 1, 1, 1, 1, 0, 0, 0, 0, 0])
    x2 = BitString.from_bits([1, 1, 1, 0, 0, 0, 0, 0, 0, 0])
    assert cl.onemax(x1) >= cl.onemax(x2)
    new, out = apply_update(fv, x1, x2, cl.one_max(10))
    # winner x1 has bit 1 clear: raw step to 1/n - 1/mu, clamped back
    assert new.values_exact()[0] == Fraction(1, 10)
    assert out.capped_low == 1 and out.capped_high == 0
    assert out.clamp_correction_low == Fraction(1, 5)


def test_tie_keeps_first_sample(params10):
    fv = cl.FrequencyVector.initial(params10)
    x1 = BitString.from_bits([1, 0, 0, 0, 0, 0, 0, 0, 0, 0])
    x2 = BitString.from_bits([0, 1, 0, 0, 0, 0, 0, 0, 0, 0])  # same onemax value
    new, out = apply_update(fv, x1, x2, cl.one_max(10))
    assert out.winner_first
    assert new.values_exact()[0] == Fraction(7, 10)
    assert new.values_exact()[1] == Fraction(3, 10)


def test_no_touch_invariance(params10, rng):
    fv = cl.FrequencyVector.initial(params10)
    for _ in range(50):
        x1 = cl.sample(fv, rng)
        x2 = cl.sample(fv, rng)
        new, _ = apply_update(fv, x1, x2, cl.jump(10, 2))
        same = x1.bits == x2.bits
        assert np.array_equal(new.indices[same], fv.indices[same])
        fv = new


def test_cga_step_draw_order(params10):
    # cga_step samples x1 then x2 from one stream, then updates
    fv = cl.FrequencyVector.initial(params10)
    rng = Rng(5)
    new, out = cl.cga_step(fv, cl.one_max(10), params10, rng)
    r2 = Rng(5)
    x1 = cl.sample(fv, r2)
    x2 = cl.sample(fv, r2)
    assert out.x1 == x1 and out.x2 == x2
    expected, _ = apply_update(fv, x1, x2, cl.one_max(10))
    assert np.array_equal(new.indices, expected.indices)


# ---------------------------------------------------------------- running


def test_run_zero_budget(params10):
    res = cl.run_cga(params10, cl.one_max(10), budget=0)
    assert not res.hit_optimum
    assert res.iterations_used == 0 and res.samples_used == 0


def test_run_from_forced_boundary_hits_fast():
    # f at 1 - 1/n everywhere: per-sample hit probability 0.95^20, so over
    # 200 runs with a 10^4 budget virtually every run must succeed.
    p = cl.make_params(20, 20, "reject", max_iterations=10_000)
    per_sample = 0.95**20
    per_iter = 1 - (1 - per_sample) ** 2
    assert per_iter > 0.58  # oracle for the expected-hit scale
    hits = 0
    for rep in range(200):
        pp = cl.CgaParams(n=20, mu=20, max_iterations=10_000,
                          seed=cl.derive_replicate_seed(2024, rep))
        init = cl.FrequencyVector(np.full(20, pp.n_mu, dtype=np.int64), pp)
        res = cl.run_cga(pp, cl.one_max(20), initial=init)
        hits += res.hit_optimum
    assert hits / 200 >= 0.99


def test_run_matches_python_replication():
    # Dual route: the jitted loop must agree step for step with the pure
    # Python sample/apply_update path, including optimum detection rules.
    p = cl.make_params(8, 8, "reject", max_iterations=500, seed=31415)
    fit = cl.jump(8, 2)
    res = cl.run_cga(p, fit)

    fv = cl.FrequencyVector.initial(p)
    rng = Rng(31415)
    iters = samples = 0
    hit = False
    for t in range(1, p.max_iterations + 1):
        x1 = cl.sample(fv, rng)
        iters, samples = t, samples + 1
        if x1.ones == 8:
            hit = True
            break
        x2 = cl.sample(fv, rng)
        samples += 1
        if x2.ones == 8:
            hit = True
            break
        fv, _ = apply_update(fv, x1, x2, fit)
    assert res.hit_optimum == hit
    assert res.iterations_used == iters
    assert res.samples_used == samples
    if not hit:
        assert res.final_D == float(fv.distance_to_ones_exact())


def test_run_samples_accounting_on_hit():
    p = cl.make_params(6, 6, "reject", max_iterations=100_000, seed=2)
    res = cl.run_cga(p, cl.one_max(6))
    assert res.hit_optimum
    assert res.samples_used in (2 * res.iterations_used - 1, 2 * res.iterations_used)


def test_budget_stopping_runs_past_the_optimum():
    # with stopping="budget" the run keeps going; the recorded first hit must
    # match the default run's stopping point exactly (same seed, same stream)
    p = cl.make_params(8, 8, "reject", max_iterations=5000, seed=64)
    fit = cl.one_max(8)
    stopped = cl.run_cga(p, fit)
    assert stopped.hit_optimum
    forever = cl.run_cga(p, fit, stopping="budget")
    assert forever.hit_optimum
    assert forever.reason == "budget"
    assert forever.iterations_used == 5000
    assert forever.samples_used == 10_000
    assert forever.first_hit_iteration == stopped.iterations_used
    assert forever.first_hit_samples == stopped.samples_used


def test_stopping_rule_validation(params10):
    with pytest.raises(ValueError, match="stopping"):
        cl.run_cga(params10, cl.one_max(10), stopping="whenever")
    with pytest.raises(ValueError, match="target"):
        cl.run_cga(params10, cl.one_max(10), stopping="target_d")


def test_run_target_d_stopping():
    p = cl.make_params(30, 30, "round_up", max_iterations=100_000, seed=8)
    res = cl.run_cga(p, cl.one_max(30), target_d=10.0)
    assert res.reason in ("target_d", "optimum")
    if res.reason == "target_d":
        assert res.final_D <= 10.0
        assert res.iterations_used < 100_000


def test_run_determinism_and_resume():
    p = cl.make_params(12, 12, "round_up", max_iterations=200, seed=777)
    fit = cl.jump(12, 3)
    full = cl.run_cga(p, fit)
    again = cl.run_cga(p, fit)
    assert full.iterations_used == again.iterations_used
    assert full.final_D == again.final_D

    run = cl.CgaRun(p, fit)
    run.advance(80)
    resumed = run.advance(120)
    assert resumed.iterations_used == full.iterations_used
    assert resumed.samples_used == full.samples_used
    assert resumed.final_D == full.final_D


def test_run_invariant_checker_clean():
    # small mu forces heavy boundary traffic; all per-step checks must pass
    p = cl.make_params(16, 8, "round_up", max_iterations=20_000, seed=5)
    res = cl.run_cga(p, cl.jump(16, 4), check_invariants=True)
    assert res.violations is not None
    assert res.violations.sum() == 0


# ---------------------------------------------------------------- tracing


def test_trace_contents_and_stride():
    p = cl.make_params(10, 10, "reject", max_iterations=101, seed=4,
                       record_trace=True, trace_stride=10)
    res = cl.run_cga(p, cl.jump(10, 2))
    tr = res.trace
    assert tr is not None
    assert tr.t[0] == 0
    assert np.all(np.diff(tr.t) > 0)
    assert tr.t[-1] == res.iterations_used
    inner = tr.t[1:-1]
    assert np.all(inner % 10 == 0)
    assert np.all(tr.D >= 0) and np.all(tr.D <= p.n - 2)
    assert np.all(np.diff(tr.gap_hits) >= 0)
    assert np.all(np.diff(tr.caps_low) >= 0) and np.all(np.diff(tr.caps_high) >= 0)
    assert tr.Y is None


def test_trace_jsonl_format(tmp_path):
    p = cl.make_params(10, 5, "reject", max_iterations=25, seed=1,
                       record_trace=True, trace_stride=5)
    res = cl.run_cga(p, cl.jump(10, 3), potential_c=0.05)
    path = tmp_path / "trace.jsonl"
    res.trace.to_jsonl(path)
    lines = path.read_text().strip().split("\n")
    assert len(lines) == len(res.trace)
    for line in lines:
        doc = json.loads(line)
        assert list(doc.keys()) == ["t", "D", "fmin", "gap_hits", "caps_low",
                                    "caps_high", "Y"]
    first = json.loads(lines[0])
    assert first["t"] == 0 and first["D"] == 5.0
    assert first["Y"] == pytest.approx(math.exp(0.05 * min(1.5 - 5.0, 0.75)))


def test_trace_envelope_range_growth():
    # f_t stays within [1/2 - t/mu, 1/2 + t/mu]: checked in-kernel, and the
    # trace extremes give an independent view via fmin.
    p = cl.make_params(40, 20, "round_up", max_iterations=3000, seed=12,
                       record_trace=True, trace_stride=1)
    res = cl.run_cga(p, cl.one_max(40), check_invariants=True)
    assert res.violations.sum() == 0
    tr = res.trace
    lower_env = 0.5 - tr.t / p.mu
    assert np.all(tr.fmin >= np.maximum(lower_env, 1.0 / p.n) - 1e-12)


def test_bitstring_cache_validation():
    with pytest.raises(AssertionError):
        BitString(np.array([1, 0, 1], dtype=np.uint8), ones=5)
