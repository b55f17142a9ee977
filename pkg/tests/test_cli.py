import json
import math
import subprocess
import sys

import numpy as np
import pytest

from rootstat.basisfn import dft_unitary
from rootstat.cli import (DEFAULTS, main, read_counts, read_protocol, read_samples, read_truth, write_counts,
                          write_protocol, write_samples, write_truth)
from rootstat.infomat import MeasurementProtocol
from rootstat.mlsolve import RegisterCounts
from rootstat.stattest import chi2_quantile


def run(*args):
    return main([str(a) for a in args])


def load(path):
    return json.loads(path.read_text())


def test_samples_round_trip(tmp_path):
    vals = np.random.default_rng(0).normal(size=50) * 1e-3 + 1e5
    write_samples(tmp_path / "s.csv", vals)
    assert np.array_equal(read_samples(tmp_path / "s.csv"), vals)


def test_truth_protocol_counts_round_trip(tmp_path):
    c = np.array([0.1 + 0.2j, -0.3, 1 / 3])
    write_truth(tmp_path / "t.json", c)
    assert np.array_equal(read_truth(tmp_path / "t.json"), c)
    p = MeasurementProtocol(np.vstack([np.eye(2), dft_unitary(2)]), [1.0, 2.0, 0.5, 0.25], [3, 0, 7, 1])
    write_protocol(tmp_path / "p.json", p)
    q = read_protocol(tmp_path / "p.json")
    assert np.array_equal(q.X, p.X) and np.array_equal(q.t, p.t) and np.array_equal(q.k, p.k)
    counts = RegisterCounts([1, 2, 3], [4, 5, 6])
    U = dft_unitary(3)
    write_counts(tmp_path / "c.json", counts, U)
    back, V = read_counts(tmp_path / "c.json")
    assert np.array_equal(back.n_counts, counts.n_counts) and np.array_equal(V, U)


def test_simulate_continuous_writes_files(tmp_path):
    assert run("simulate", "--mode", "continuous", "--basis-size", 3, "--n", 1000, "--m", 1000,
               "--seed", 4, "--out", tmp_path) == 0
    for name in ("samples_x.csv", "samples_p.csv"):
        assert (tmp_path / name).read_text().count("\n") == 1001
    manifest = load(tmp_path / "manifest.json")
    assert manifest["config"]["seed"] == 4 and manifest["command"] == "simulate"


def test_simulate_is_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert run("simulate", "--mode", "register", "--basis-size", 4, "--seed", 9, "--out", tmp_path / d) == 0
    for name in ("counts.json", "truth.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seed_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("ROOTSTAT_SEED", "9")
    assert run("simulate", "--mode", "register", "--basis-size", 4, "--out", tmp_path / "env") == 0
    assert run("simulate", "--mode", "register", "--basis-size", 4, "--seed", 9, "--out", tmp_path / "flag") == 0
    assert (tmp_path / "env" / "counts.json").read_bytes() == (tmp_path / "flag" / "counts.json").read_bytes()
    monkeypatch.setenv("ROOTSTAT_SEED", "nine")
    assert run("simulate", "--mode", "register", "--basis-size", 4, "--out", tmp_path / "x") == 1


def test_config_precedence_and_unknown_keys(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"mode": "register", "basis_size": 2, "n": 7, "m": 3}))
    assert run("simulate", "--config", cfg, "--n", 11, "--out", tmp_path / "o") == 0
    counts = load(tmp_path / "o" / "counts.json")
    assert sum(counts["n_counts"]) == 11 and sum(counts["m_counts"]) == 3
    cfg.write_text(json.dumps({"mode": "register", "colour": "red"}))
    assert run("simulate", "--config", cfg, "--out", tmp_path / "o") == 1
    assert set(DEFAULTS) >= {"mode", "basis_size", "alpha", "seed"}


def test_poisson_simulate_adds_counts(tmp_path):
    X = np.vstack([np.eye(2), dft_unitary(2)])
    write_protocol(tmp_path / "p.json", MeasurementProtocol(X, np.ones(4)))
    write_truth(tmp_path / "t.json", math.sqrt(1000) * np.array([1, 1j]))
    assert run("simulate", "--mode", "poisson", "--protocol", tmp_path / "p.json", "--truth", tmp_path / "t.json",
               "--out", tmp_path / "o") == 0
    assert all(isinstance(p["k"], int) for p in load(tmp_path / "o" / "protocol.json")["processes"])
    assert run("estimate", "--mode", "poisson", "--protocol", tmp_path / "o" / "protocol.json",
               "--truth", tmp_path / "t.json", "--out", tmp_path / "r.json") == 0
    rep = load(tmp_path / "r.json")
    assert rep["completeness"]["complete"]
    assert rep["lambda_check"]["relative_gap"] < 1e-8
    assert rep["fidelity"]["F_H"] > 0.99


def test_register_pipeline_meets_cone_threshold(tmp_path):
    assert run("simulate", "--mode", "register", "--basis-size", 4, "--n", 5000, "--m", 5000, "--seed", 2,
               "--out", tmp_path) == 0
    assert run("estimate", "--mode", "register", "--counts", tmp_path / "counts.json",
               "--truth", tmp_path / "truth.json", "--out", tmp_path / "r.json") == 0
    rep = load(tmp_path / "r.json")
    assert rep["converged"] and rep["lambda_check"]["relative_gap"] < 1e-8
    for key in ("c_re", "c_im", "loglik", "H_eigenvalues", "completeness", "cone_half_angle_rad", "fidelity"):
        assert key in rep
    # generous 1e-6 tail of the chi-square law for 2(s-1) real fluctuation directions
    assert rep["fidelity"]["cone_statistic"] < chi2_quantile(1e-6, 6)


def test_continuous_pipeline(tmp_path):
    assert run("simulate", "--mode", "continuous", "--basis-size", 3, "--n", 2000, "--m", 2000, "--seed", 5,
               "--out", tmp_path) == 0
    assert run("estimate", "--mode", "continuous", "--basis-size", 3, "--samples-x", tmp_path / "samples_x.csv",
               "--samples-p", tmp_path / "samples_p.csv", "--truth", tmp_path / "truth.json",
               "--out", tmp_path / "r.json") == 0
    rep = load(tmp_path / "r.json")
    assert rep["lambda_check"]["relative_gap"] < 1e-8
    assert rep["fidelity"]["fidelity"] > 0.99


def test_alpha_monotonicity(tmp_path):
    run("simulate", "--mode", "register", "--basis-size", 3, "--seed", 1, "--out", tmp_path)
    angles = []
    for alpha in (0.01, 0.05, 0.2):
        assert run("estimate", "--mode", "register", "--counts", tmp_path / "counts.json", "--alpha", alpha,
                   "--out", tmp_path / f"r{alpha}.json") == 0
        angles.append(load(tmp_path / f"r{alpha}.json")["cone_half_angle_rad"])
    assert angles[0] > angles[1] > angles[2]


def test_incomplete_protocol_exit_code(tmp_path, capsys):
    (tmp_path / "p.json").write_text(json.dumps(
        {"s": 2, "processes": [{"x_re": [1, 0], "t": 1, "k": 5}, {"x_re": [1, 0], "t": 2, "k": 9}]}))
    assert run("estimate", "--mode", "poisson", "--protocol", tmp_path / "p.json", "--out", "-") == 3
    assert "protocol incomplete" in capsys.readouterr().err


def test_non_convergence_exit_code_writes_report(tmp_path):
    run("simulate", "--mode", "register", "--basis-size", 4, "--seed", 3, "--out", tmp_path)
    code = run("estimate", "--mode", "register", "--counts", tmp_path / "counts.json", "--max-iter", 2,
               "--init", "uniform", "--out", tmp_path / "r.json")
    assert code == 2
    rep = load(tmp_path / "r.json")
    assert rep["converged"] is False and len(rep["c_re"]) == 4


def test_usage_and_io_exit_codes(tmp_path):
    assert run("estimate", "--counts", tmp_path / "c.json") == 1  # no mode
    assert run("estimate", "--mode", "register", "--counts", tmp_path / "missing.json") == 4
    (tmp_path / "bad.csv").write_text("x\n1\n")
    assert run("estimate", "--mode", "continuous", "--basis-size", 2, "--samples-x", tmp_path / "bad.csv") == 4
    assert run("estimate", "--mode", "register", "--counts", tmp_path / "c.json", "--alpha", 2) == 1
    assert run("frobnicate") == 1


def test_fig1_reports_ratio(tmp_path, capsys):
    assert run("fig1", "--out", tmp_path / "f.json") == 0
    out = capsys.readouterr().out
    assert "ratio=" in out
    rep = load(tmp_path / "f.json")
    assert rep["ratio"] == pytest.approx(1.82, abs=0.01)
    run("fig1", "--n", 10000, "--out", tmp_path / "g.json")
    big = load(tmp_path / "g.json")
    assert big["mae_root"] < rep["mae_root"] and big["mae_ml"] < rep["mae_ml"]


def test_fig1_symmetric_ml_column(capsys):
    assert run("fig1", "--n", 20, "--p1", 0.5) == 0
    rows = [line.split("\t") for line in capsys.readouterr().out.splitlines()[1:] if "\t" in line]
    ml = {int(r[0]): float(r[3]) for r in rows}
    for k in range(21):
        assert ml[k] == pytest.approx(ml[20 - k], abs=1e-15)


def test_dynamics_default_passes(tmp_path):
    assert run("dynamics", "--out", tmp_path / "d.json") == 0
    rep = load(tmp_path / "d.json")
    assert rep["heisenberg_residual"] < 1e-6 and rep["pass"]


def test_dynamics_coarse_grid_warns_and_strict_fails(tmp_path, capsys):
    fine = run("dynamics", "--grid-n", 512, "--grid-lo", -9, "--grid-hi", 9, "--basis-size", 10,
               "--out", tmp_path / "f.json")
    run("dynamics", "--grid-n", 512, "--grid-lo", -6.5, "--grid-hi", 6.5, "--basis-size", 10,
        "--out", tmp_path / "c.json")
    assert fine == 0
    coarse = load(tmp_path / "c.json")
    assert coarse["warnings"] and coarse["heisenberg_residual"] > load(tmp_path / "f.json")["heisenberg_residual"]
    assert "warning" in capsys.readouterr().err
    assert run("dynamics", "--grid-n", 512, "--grid-lo", -6.5, "--grid-hi", 6.5, "--basis-size", 10,
               "--strict") == 2


def test_dynamics_negative_control_fails(tmp_path):
    assert run("dynamics", "--potential", "quartic", "--basis-size", 10, "--control-scale", 0.5,
               "--out", tmp_path / "d.json") != 0
    assert load(tmp_path / "d.json")["heisenberg_residual"] > 0.1


def test_dynamics_table_potential(tmp_path):
    xs = np.linspace(-13, 13, 2601)
    (tmp_path / "u.csv").write_text("x,U\n" + "".join(f"{x!r},{0.5 * x * x!r}\n" for x in xs.tolist()))
    assert run("dynamics", "--potential", "table", "--potential-table", tmp_path / "u.csv", "--basis-size", 8,
               "--heisenberg-max", 1e-3, "--out", tmp_path / "d.json") == 0
    assert np.allclose(load(tmp_path / "d.json")["frequencies"], np.arange(8) + 0.5, atol=1e-5)


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "rootstat", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "0.1.0" in out.stdout
