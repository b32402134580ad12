import json
import math
import warnings

import numpy as np
import pytest

import cga_lab as cl
from cga_lab import experiments as ex


def test_eval_rule():
    assert ex.eval_rule("20 * mu * sqrt(n)", n=100, mu=3) == pytest.approx(600.0)
    assert ex.eval_rule("12 * log(n)", n=math.e**2) == pytest.approx(24.0)


def test_spec_json_round_trip():
    spec = ex.default_spec("upper_scaling", quick=True)
    again = ex.ExperimentSpec.from_json_dict(spec.to_json_dict())
    assert again == spec


def test_spec_rejects_unknown_fields():
    with pytest.raises(ValueError, match="unknown config fields"):
        ex.ExperimentSpec.from_json_dict({"kind": "upper_scaling", "bogus": 1})


def test_spec_rejects_zero_replicates():
    with pytest.raises(ValueError):
        ex.ExperimentSpec(kind="x", replicates=0)


def test_run_cell_accounting():
    cell = ex.run_cell(20, 2, 20, 500, cl.jump(20, 2), replicates=16, cell_seed=3)
    assert 0.0 <= cell.success_rate <= 1.0
    assert np.all(cell.runtimes >= 1) and np.all(cell.runtimes <= cell.budget)
    # censoring identity: successes + censored + other-stops = replicates
    successes = int(cell.hits.sum())
    assert successes + cell.censored_count == cell.replicates
    assert cell.censored_count == int((cell.runtimes == cell.budget).sum()) or \
        cell.success_rate == 1.0


def test_run_cell_thread_counts_agree():
    cells = [ex.run_cell(24, 2, 24, 2000, cl.jump(24, 2), replicates=12,
                         cell_seed=9, threads=t) for t in (1, 2, 4)]
    base = cells[0]
    for c in cells[1:]:
        assert np.array_equal(c.runtimes, base.runtimes)
        assert c.success_rate == base.success_rate
        assert c.mean_final_D == base.mean_final_D


def test_upper_scaling_quick_and_csv_determinism(tmp_path):
    spec = ex.default_spec("upper_scaling", quick=True)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep1 = ex.run_upper_scaling(spec, threads=2)
        rep2 = ex.run_upper_scaling(spec, threads=1)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    ex.write_cells_csv(rep1.cells, a)
    ex.write_cells_csv(rep2.cells, b)
    assert a.read_bytes() == b.read_bytes()
    assert all(c.success_rate >= 0.9 for c in rep1.cells)
    assert rep1.spread < 3.0


def test_k_hypothesis_warns_and_enforces():
    spec = ex.default_spec("upper_scaling", quick=True)
    with pytest.warns(UserWarning, match="small-jump hypothesis"):
        ex.run_upper_scaling(spec)
    strict = ex.ExperimentSpec(**{**spec.to_json_dict(), "enforce_k_hypothesis": True})
    with pytest.raises(ValueError, match="small-jump hypothesis"):
        ex.run_upper_scaling(strict)


def test_lower_quick_structure():
    spec = ex.default_spec("lower_exponential", quick=True)
    rep = ex.run_lower_exponential(spec, threads=2)
    assert sorted(rep.best_by_k) == list(spec.ks)
    assert len(rep.cells) == len(spec.ks) * len(spec.mus)
    assert 0.0 < rep.p_value <= 1.0
    for cell in rep.cells:
        assert np.all(cell.runtimes <= cell.budget)


def test_nlogn_quick_structure():
    spec = ex.default_spec("nlogn_floor", quick=True)
    rep = ex.run_nlogn_floor(spec, threads=2, mu_arm_mus=[64, 128])
    assert set(rep.ratios) == set(spec.ns)
    assert len(rep.mu_arm_cells) == 2
    assert rep.rows == rep.cells + rep.mu_arm_cells


def test_domination_quick():
    spec = ex.default_spec("domination_demo", quick=True)
    rep = ex.run_domination_demo(spec)
    assert rep.separated
    assert rep.mc_subjump.mean_d < rep.mc_onemax.mean_d
    assert rep.exact_direction_ok
    assert rep.prob_up_f > rep.reference_bound_f  # comfortably above the proof floor
    assert rep.prob_up_g == pytest.approx(0.25, abs=0.12)


def test_domination_needs_even_n():
    spec = ex.default_spec("domination_demo", quick=True)
    spec.ns = [201]
    with pytest.raises(ValueError, match="even"):
        ex.run_domination_demo(spec)


def test_domination_csv(tmp_path):
    spec = ex.default_spec("domination_demo", quick=True)
    rep = ex.run_domination_demo(spec)
    path = tmp_path / "dom.csv"
    ex.write_domination_csv(rep, path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("arm,n,mu,replicates,mean_d")
    assert len(lines) == 5  # header + 2 arms + 2 exact rows


def test_potential_quick():
    spec = ex.default_spec("potential_trace", quick=True)
    rep = ex.run_potential_trace(spec, threads=2)
    assert rep.holds
    assert rep.bins, "no populated D bins"
    total = sum(b.count for b in rep.bins)
    assert total > 1000
    y_max_region = [b for b in rep.bins if b.d_bin < rep.k / 4]
    assert not y_max_region  # conditioning on Y_t < Y_max excludes D <= k/4


def test_potential_y_function_edges():
    # Y saturates at exp(ck/4) once D <= k/4 and is <= 1 for D >= k/2
    c, k = 0.05, 8
    y = lambda d: math.exp(c * min(k / 2 - d, k / 4))
    assert y(2.0) == y(1.0) == y(0.0) == math.exp(c * k / 4)
    assert y(4.0) == 1.0
    assert y(6.5) < 1.0


def test_potential_csv(tmp_path):
    spec = ex.default_spec("potential_trace", quick=True)
    rep = ex.run_potential_trace(spec)
    path = tmp_path / "pot.csv"
    ex.write_potential_csv(rep, path)
    assert path.read_text().splitlines()[0] == "d_bin,count,mean_dY,se_dY,bound"


def test_default_spec_unknown_kind():
    with pytest.raises(ValueError):
        ex.default_spec("nope")
