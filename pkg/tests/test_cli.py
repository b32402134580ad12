import json

import pytest

from cga_lab import cli, oracle


def run_cli(args):
    return cli.main(args)


def test_run_writes_trace(tmp_path):
    trace = tmp_path / "t.jsonl"
    code = run_cli(["run", "--n", "12", "--mu", "12", "--fitness", "jump", "--k", "2",
                    "--budget", "200", "--seed", "3", "--trace", str(trace),
                    "--stride", "50"])
    assert code == 0
    lines = trace.read_text().strip().splitlines()
    assert lines
    doc = json.loads(lines[0])
    assert list(doc) == ["t", "D", "fmin", "gap_hits", "caps_low", "caps_high", "Y"]


def test_run_rounds_mu_up(capsys):
    assert run_cli(["run", "--n", "10", "--mu", "6", "--budget", "10"]) == 0
    out = capsys.readouterr().out
    assert "rounded up" in out and "10" in out


def test_verify_quick_exit_zero(tmp_path):
    code = run_cli(["verify", "--cases", "5", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "verify.csv").exists()


def test_verify_violation_exit_one(tmp_path, monkeypatch):
    def broken(cases=None, seed=0, extra_checks=(), out_csv=None):
        rows = [oracle.CheckResult("fixture", "bad", 2.0, 1.0, False)]
        if out_csv:
            from cga_lab.verify import write_rows_csv
            write_rows_csv(rows, out_csv)
        return rows, 1
    monkeypatch.setattr("cga_lab.cli.verify.run_verify_suite", broken)
    code = run_cli(["verify", "--out", str(tmp_path)])
    assert code == 1


def test_sweep_upper_quick(tmp_path):
    code = run_cli(["sweep", "--kind", "upper", "--quick", "--out", str(tmp_path),
                    "--threads", "2"])
    assert code == 0
    text = (tmp_path / "upper.csv").read_text()
    assert text.startswith("n,k,mu,budget,replicates,success_rate")


def test_sweep_with_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "kind": "upper_scaling", "ns": [32], "ks": [2],
        "mu_rule": "12 * sqrt(n) * log(n)", "budget_rule": "20 * mu * sqrt(n)",
        "replicates": 4, "master_seed": 5}))
    code = run_cli(["sweep", "--kind", "upper", "--config", str(cfg),
                    "--out", str(tmp_path)])
    assert code == 0


def test_bad_config_exit_two(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    assert run_cli(["sweep", "--kind", "upper", "--config", str(cfg)]) == 2
    cfg.write_text(json.dumps({"kind": "upper_scaling", "bogus": True}))
    assert run_cli(["sweep", "--kind", "upper", "--config", str(cfg)]) == 2
    cfg.write_text(json.dumps({"kind": "lower_exponential"}))
    assert run_cli(["sweep", "--kind", "upper", "--config", str(cfg)]) == 2


def test_parallel_command(tmp_path):
    code = run_cli(["parallel", "--n", "16", "--fitness", "onemax",
                    "--cap", "1048576", "--seed", "4", "--out", str(tmp_path)])
    assert code == 0
    log = (tmp_path / "parallel_log.csv").read_text().splitlines()
    assert log[0] == "round,process,mu,spent_this_round,cumulative,status"
    assert any("succeeded" in line for line in log[1:])


def test_demo_domination_quick(tmp_path, capsys):
    code = run_cli(["demo", "--kind", "domination", "--quick", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "domination.csv").exists()
    assert "separated=True" in capsys.readouterr().out


def test_demo_potential_quick(tmp_path):
    code = run_cli(["demo", "--kind", "potential", "--quick", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "potential.csv").exists()


def test_oracle_ops(capsys):
    assert run_cli(["oracle", "--op", "pmf", "--f", "0.5,0.5"]) == 0
    assert json.loads(capsys.readouterr().out) == [0.25, 0.5, 0.25]
    assert run_cli(["oracle", "--op", "point", "--f", "0.5,0.5", "--x", "11"]) == 0
    assert float(capsys.readouterr().out) == 0.25
    assert run_cli(["oracle", "--op", "distinct", "--f", "0.5,0.5"]) == 0
    assert float(capsys.readouterr().out) == 0.625
    assert run_cli(["oracle", "--op", "binom-tail", "--n", "4", "--p", "0.5",
                    "--k", "2"]) == 0
    assert "holds=True" in capsys.readouterr().out
    assert run_cli(["oracle", "--op", "gap-claim", "--n", "200", "--k", "30",
                    "--p", "3"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert "claim_holds" in doc


def test_unknown_subcommand_exits_two():
    with pytest.raises(SystemExit) as e:
        run_cli(["frobnicate"])
    assert e.value.code == 2
