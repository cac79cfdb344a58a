import numpy as np
import pytest

from dcprox import bench, cli, cs


def test_parse_config(tmp_path):
    p = tmp_path / "cfg.txt"
    p.write_text("# comment\ncases = 1, 5\nn_seeds = 2  # inline\n\nloss_kind = lorentzian\n")
    raw = cli.parse_config(p)
    assert raw == {"cases": "1, 5", "n_seeds": "2", "loss_kind": "lorentzian"}


def test_parse_config_rejects_garbage(tmp_path):
    p = tmp_path / "cfg.txt"
    p.write_text("just some words\n")
    with pytest.raises(ValueError, match="key = value"):
        cli.parse_config(p)


def test_config_from_dict_coercion():
    cfg = cli.config_from_dict({
        "cases": "1,2", "solvers": "gppa, proposed", "n_seeds": "3",
        "gamma": "0.5", "loss_kind": "lorentzian", "workers": "2",
    })
    assert cfg.cases == (1, 2)
    assert cfg.solvers == ("gppa", "proposed")
    assert cfg.n_seeds == 3
    assert cfg.gamma == 0.5


def test_config_rejects_unknown_key():
    with pytest.raises(ValueError, match="unknown config key"):
        cli.config_from_dict({"frobnicate": "1"})


def test_config_rejects_unknown_solver():
    with pytest.raises(ValueError, match="unimplemented solvers"):
        bench.ExperimentConfig(solvers=("admm",))


def test_config_rejects_zero_seeds():
    with pytest.raises(ValueError):
        bench.ExperimentConfig(n_seeds=0)


def test_sweep_shape_single_cell():
    cfg = bench.ExperimentConfig(cases=(1,), solvers=("proposed",), n_seeds=1)
    res = bench.run_cs_sweep(cfg)
    assert len(res.rows) == 1
    assert len(res.runs) == 1
    assert res.rows[0]["case"] == 1
    assert res.rows[0]["n_errors"] == 0


def test_sweep_csv_byte_stable():
    cfg = bench.ExperimentConfig(cases=(1,), solvers=("gppa", "proposed"),
                                 n_seeds=2)
    a = bench.run_cs_sweep(cfg)
    b = bench.run_cs_sweep(cfg)

    def strip_cpu(text):
        head, *rows = text.splitlines()
        cols = head.split(",")
        keep = [i for i, c in enumerate(cols) if "nondeterministic" not in c]
        return [",".join(np.array(r.split(","))[keep]) for r in [head] + rows]

    assert strip_cpu(bench.results_csv_text(a.rows)) == strip_cpu(
        bench.results_csv_text(b.rows))
    assert "nondeterministic" in bench.results_csv_text(a.rows).splitlines()[0]


def test_sweep_records_cell_failures(monkeypatch):
    cfg = bench.ExperimentConfig(cases=(1,), solvers=("proposed",), n_seeds=1)

    def boom(*a, **k):
        raise RuntimeError("injected")

    monkeypatch.setattr(bench.psg, "solve", boom)
    res = bench.run_cs_sweep(cfg)
    assert res.rows[0]["n_errors"] == 1
    assert "injected" in res.runs[0].failure


def test_cli_cs_run(tmp_path, capsys):
    p = tmp_path / "cfg.txt"
    p.write_text("cases = 1\nsolvers = proposed\nn_seeds = 1\n")
    rc = cli.main(["cs-run", "--config", str(p)])
    out = capsys.readouterr().out
    assert rc == 0
    assert out.startswith("case,solver,")
    assert "proposed" in out


def test_cli_gen_round_trip(tmp_path, capsys):
    out_dir = tmp_path / "inst"
    rc = cli.main(["gen", "--case", "1", "--seed", "3", "--out", str(out_dir)])
    assert rc == 0
    inst = cs.load_instance(out_dir)
    ref = cs.make_instance(1, 3, 0.1, "least-squares")
    assert np.array_equal(inst.A, ref.A)


def test_cli_check_exit_code():
    assert cli.main(["check"]) == 0


def test_run_checks_surfaces_injected_failure(capsys):
    failures = bench.run_checks(
        extra_checks=[("injected breaker", False, "on purpose")])
    out = capsys.readouterr().out
    assert failures == 1
    assert "injected breaker" in out and "FAIL" in out
