import csv

from cga_lab import oracle, verify


def test_quick_suite_all_hold():
    rows, failures = verify.run_verify_suite(cases=25)
    assert failures == 0
    assert len(rows) > 400
    lemmas = {r.lemma for r in rows}
    assert {"binomial_tail", "point_prob_upper", "point_prob_lower", "distinct_norms", "onecount_tail_upper", "onecount_tail_lower",
            "gap_bound", "per_bit_drift", "clamp_low", "clamp_high",
            "drift_clamp_term"} <= lemmas


def test_injected_violation_is_counted():
    broken = lambda: [oracle.CheckResult("fixture", "broken", 2.0, 1.0, False)]
    rows, failures = verify.run_verify_suite(cases=5, extra_checks=[broken])
    assert failures == 1
    assert any(r.lemma == "fixture" and not r.holds for r in rows)


def test_csv_output_schema(tmp_path):
    path = tmp_path / "verify.csv"
    rows, failures = verify.run_verify_suite(cases=5, out_csv=path)
    assert failures == 0
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        assert header == ["lemma", "case_id", "lhs", "rhs", "holds"]
        body = list(reader)
    assert len(body) == len(rows)
    assert all(r[4] in ("true", "false") for r in body)


def test_suite_is_seed_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    verify.run_verify_suite(cases=10, seed=5, out_csv=a)
    verify.run_verify_suite(cases=10, seed=5, out_csv=b)
    assert a.read_bytes() == b.read_bytes()
    verify.run_verify_suite(cases=10, seed=6, out_csv=b)
    assert a.read_bytes() != b.read_bytes()


def test_individual_sweeps_shape():
    rows = verify.sweep_binomial_tail(n_max=5, seed=0)
    assert len(rows) == sum((n + 1) * 9 for n in range(1, 6))
    rows = verify.sweep_onecount_tails(cases=7, seed=0)
    assert len(rows) == 14  # both tails per case
