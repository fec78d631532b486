import json
import math
import os

import pytest

from holodyn.errors import InvalidConfig, NonemptyRequired
from holodyn.harness import cli
from holodyn.harness.config import ExperimentConfig, from_dict, load, loads
from holodyn.harness.runner import derive_seed, emit_report, run_experiment, sweep


def cfg(tmp_path, kind, name="run", **kw):
    return from_dict({"kind": kind, "out_dir": str(tmp_path / name), **kw})


def test_config_round_trip(tmp_path):
    c = cfg(tmp_path, "area-scan", c_re=-2.0, n=[20, 30], samples=100)
    again = loads(c.to_toml())
    assert again == c
    assert again.params["n"] == [20, 30]
    assert "schema = 1" in c.to_toml()


def test_config_field_diagnostics():
    with pytest.raises(InvalidConfig) as info:
        from_dict({"kind": "lyapunov", "n_max": "x", "bogus": 1, "d": 1})
    assert set(info.value.problems) == {"n_max", "bogus", "d"}
    with pytest.raises(InvalidConfig) as info:
        from_dict({"kind": "nope"})
    assert "kind" in info.value.problems
    with pytest.raises(InvalidConfig):
        from_dict({"kind": "lyapunov", "schema": 2})
    with pytest.raises(InvalidConfig):
        loads("kind = 'orbit'\n[table]\nx = 1\n")


def test_digest_ignores_location_and_parallelism(tmp_path):
    a = cfg(tmp_path, "lyapunov", "a", workers=1)
    b = cfg(tmp_path, "lyapunov", "b", workers=4)
    assert a.digest() == b.digest()
    assert a.digest() != cfg(tmp_path, "lyapunov", "a", seed=1).digest()


def test_lyapunov_chebyshev(tmp_path):
    rec = run_experiment(cfg(tmp_path, "lyapunov", c_re=-2.0))
    assert rec.summary["chi_final"] == pytest.approx(math.log(4), abs=1e-12)
    stored = json.loads(open(os.path.join(rec.out_dir, "results.json")).read())
    assert stored["digest"] == rec.digest and stored["kind"] == "lyapunov"
    assert os.path.exists(os.path.join(rec.out_dir, "lyapunov.csv"))
    assert os.path.exists(os.path.join(rec.out_dir, "run.log"))


def test_cycle_detect_record(tmp_path):
    rec = run_experiment(cfg(tmp_path, "cycle-detect", c_re=-1.0))
    assert rec.summary["period"] == 2 and rec.summary["multiplier_abs"] == 0


def test_pliss_record(tmp_path):
    rec = run_experiment(cfg(tmp_path, "pliss"))
    assert rec.summary["times"] == [1, 2, 3] and rec.verdict == "pass"


def test_domain_errors_are_records(tmp_path):
    rec = run_experiment(cfg(tmp_path, "density-report", z0_re=0.5, m=1000, lam=1.5))
    assert rec.verdict == "error" and rec.summary["error"] == "HypothesisFails"


def test_invalid_policy_is_config_error(tmp_path):
    with pytest.raises(InvalidConfig):
        run_experiment(cfg(tmp_path, "backward", policy="sideways"))


def test_sweep_edge_cases(tmp_path):
    base = cfg(tmp_path, "lyapunov", "sweep", n_max=200)
    assert sweep(base, "c", []) == []
    one = sweep(base, "c", ["-2"])
    single = run_experiment(base.with_updates(c_re=-2.0, seed=derive_seed(0, 0),
                                              out_dir=str(tmp_path / "single")))
    assert one[0].summary == single.summary and one[0].digest == single.digest


def test_sweep_isolates_failures(tmp_path):
    base = cfg(tmp_path, "lyapunov", "sweep", n_max=500, workers=2)
    recs = sweep(base, "c", ["-2", "nonsense", [0.0, 1.0], "0.25"])
    assert [r.verdict for r in recs] == ["ran", "error", "ran", "ran"]
    rows = open(tmp_path / "sweep" / "sweep.csv").read().splitlines()
    assert len(rows) == 5


def test_seed_derivation_is_stable():
    assert derive_seed(7, 3) == derive_seed(7, 3)
    assert len({derive_seed(7, i) for i in range(100)}) == 100


def test_emit_report(tmp_path):
    with pytest.raises(NonemptyRequired):
        emit_report([], str(tmp_path / "rep"))
    rec = run_experiment(cfg(tmp_path, "lyapunov", c_re=0.25, n_max=50))
    dens = run_experiment(cfg(tmp_path, "density-report", "d", c_im=1.0, m=500))
    paths = emit_report([rec, dens], str(tmp_path / "rep"))
    lines = open(paths[0]).read().splitlines()
    assert lines[0] == "# n chi_n" and len(lines) == 51
    assert open(paths[1]).read().splitlines()[0] == "# n in_A is_hyperbolic"
    assert paths[-1].endswith("summary.txt")


def test_cli_exit_codes(tmp_path, capsys):
    out = str(tmp_path / "o")
    assert cli.main(["lyapunov", "--c-re", "-2", "--n-max", "20", "--out-dir", out]) == 0
    assert "verdict: ran" in capsys.readouterr().out
    assert cli.main(["lyapunov", "--n-max", "0", "--out-dir", out]) == 2
    bad = tmp_path / "bad.toml"
    bad.write_text("kind = 'lyapunov'\nn_max = 'many'\n")
    assert cli.main(["lyapunov", "--config", str(bad)]) == 2


def test_cli_config_overrides_flags(tmp_path):
    good = tmp_path / "c.toml"
    good.write_text(f"kind = 'lyapunov'\nc_re = -2.0\nn_max = 10\nout_dir = '{tmp_path / 'x'}'\n")
    assert cli.main(["lyapunov", "--config", str(good), "--n-max", "99", "--c-re", "0.1"]) == 0
    stored = json.loads((tmp_path / "x" / "results.json").read_text())
    assert stored["summary"]["steps"] == 10
    assert stored["summary"]["chi_final"] == pytest.approx(math.log(4))


def test_cli_pliss_reads_sequence_file(tmp_path, capsys):
    seq = tmp_path / "seq.csv"
    seq.write_text("0\n2\n")
    assert cli.main(["pliss", "--sequence-file", str(seq), "--out-dir", str(tmp_path / "p")]) == 0
    assert '"times": [\n      2\n    ]' in capsys.readouterr().out


def test_saved_config_reloads(tmp_path):
    rec = run_experiment(cfg(tmp_path, "fredholm", c_re=-2.0, grid=100))
    again = load(os.path.join(rec.out_dir, "config.toml"))
    assert again.digest() == rec.digest
    assert rec.summary["value"][0] == pytest.approx(6 / 7, abs=1e-12)


@pytest.mark.parametrize("kind,extra", [
    ("orbit", {"c_re": -2.0}),
    ("backward", {"c_re": -2.0, "policy": "minderiv"}),
    ("slowrec", {"c_re": -2.0, "z0_re": 0.3, "burn_in": 100}),
    ("hyptimes", {"c_im": 1.0}),
    ("shadows", {"c_im": 1.0}),
    ("return-bound", {"c_re": -2.0, "events": 50}),
    ("close-return", {"c_re": -2.0, "samples": 10}),
    ("area-scan", {"c_re": -2.0, "samples": 1000}),
    ("porosity", {"c_re": 0.0, "grid": 17}),
])
def test_every_kind_runs(tmp_path, kind, extra):
    rec = run_experiment(cfg(tmp_path, kind, **extra))
    assert rec.verdict in ("ran", "pass")
    assert os.path.getsize(rec.rows_path) > 0
