"""Command-line front end: ``rootstat simulate | estimate | fig1 | dynamics``.

Settings come from defaults, then an optional JSON ``--config`` file (keys are
the long option names with underscores), then command-line flags. The seed
falls back to the ``ROOTSTAT_SEED`` environment variable.

Exit codes: 0 success, 1 usage/config error, 2 non-convergence or failed
numerical check, 3 incomplete protocol, 4 I/O error.

File formats
------------
samples   CSV with header ``value``, one real per row (round-trip precision).
protocol  JSON ``{"s": int, "processes": [{"x_re": [...], "x_im": [...], "t": float, "k": int|null}]}``.
counts    JSON ``{"s": int, "n_counts": [...], "m_counts": [...], "u_re": [[...]], "u_im": [[...]]}``
          (the transform is optional and defaults to the DFT).
truth     JSON ``{"c_re": [...], "c_im": [...]}``.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .basisfn import HermiteBasis, dft_unitary, is_unitary
from .datagen import sample_coordinate, sample_momentum, sample_register, simulate_poisson
from .errors import (BoundaryLeakError, BoundaryLeakWarning, ConvergenceError, DomainError,
                     IncompleteProtocolError, SingularLikelihoodError)
from .infomat import MeasurementProtocol, completeness_check, info_matrices, principal_fluctuations
from .mlsolve import (RegisterCounts, SampleSet, SolverOptions, expected_continuous_info,
                      register_protocol, solve_continuous, solve_poisson, solve_register)
from .quantdyn import (Grid, MixedRootDensity, basis_eigensystem, degenerate_pairs, ehrenfest_check,
                       harmonic, heisenberg_residual, quartic, solve_eigensystem, table)
from .statevec import StateVector, fidelity, gauge_fix
from .stattest import binomial_approx_report, confidence_cone, informational_fidelity

EXIT_OK, EXIT_USAGE, EXIT_CONVERGENCE, EXIT_INCOMPLETE, EXIT_IO = 0, 1, 2, 3, 4
MODES = ("continuous", "register", "poisson")

DEFAULTS = {
    "mode": None, "basis_size": None, "scale": 1.0,
    "samples_x": None, "samples_p": None, "protocol": None, "counts": None, "truth": None,
    "alpha": 0.05, "tol": 1e-10, "max_iter": 20000, "mixing": 0.5, "init": "auto",
    "seed": None, "out": None, "strict": False,
    "n": 1000, "m": 1000,
    "fig_n": 100, "p1": 0.2,
    "potential": "harmonic", "potential_table": None, "grid_lo": -12.0, "grid_hi": 12.0, "grid_n": 2048,
    "scheme": "sinc", "control_scale": None, "heisenberg_max": 1e-6, "ehrenfest_max": 1e-4,
    "dt": 1e-3, "t_max": 2.0,
}


class ConfigError(Exception):
    pass


class DataError(Exception):
    """Input file missing, unreadable or malformed."""


# ---------------------------------------------------------------- file formats

def write_samples(path, values):
    with open(path, "w", newline="") as fh:
        fh.write("value\n")
        for v in values:
            fh.write(repr(float(v)) + "\n")


def read_samples(path) -> np.ndarray:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read samples {path}: {exc}") from exc
    if not rows or [h.strip() for h in rows[0]] != ["value"]:
        raise DataError(f"{path}: expected a CSV with the single header 'value'")
    try:
        vals = np.array([float(r[0]) for r in rows[1:] if r], dtype=float)
    except (ValueError, IndexError) as exc:
        raise DataError(f"{path}: bad sample value ({exc})") from exc
    if not np.all(np.isfinite(vals)):
        raise DataError(f"{path}: samples must be finite")
    return vals


def _read_json(path, what):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read {what} {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from exc


def _write_json(path, obj):
    text = json.dumps(obj, indent=2) + "\n"
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    with open(path, "w") as fh:
        fh.write(text)


def _complex(re, im, what):
    try:
        re = np.asarray(re, dtype=float)
        im = np.zeros_like(re) if im is None else np.asarray(im, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DataError(f"{what}: non-numeric entries") from exc
    if re.shape != im.shape:
        raise DataError(f"{what}: real and imaginary parts differ in shape")
    return re + 1j * im


def write_truth(path, c):
    c = np.asarray(c, dtype=complex)
    _write_json(path, {"c_re": c.real.tolist(), "c_im": c.imag.tolist()})


def read_truth(path) -> np.ndarray:
    obj = _read_json(path, "truth")
    if not isinstance(obj, dict) or "c_re" not in obj:
        raise DataError(f"{path}: truth needs 'c_re' (and optionally 'c_im')")
    return _complex(obj["c_re"], obj.get("c_im"), path).reshape(-1)


def write_protocol(path, protocol: MeasurementProtocol):
    k = protocol.k
    processes = [{"x_re": row.real.tolist(), "x_im": row.imag.tolist(), "t": float(t),
                  "k": None if k is None else int(round(kk))}
                 for row, t, kk in zip(protocol.X, protocol.t, k if k is not None else [None] * len(protocol.t))]
    _write_json(path, {"s": protocol.s, "processes": processes})


def read_protocol(path) -> MeasurementProtocol:
    obj = _read_json(path, "protocol")
    try:
        s = int(obj["s"])
        procs = obj["processes"]
        X = np.array([_complex(p["x_re"], p.get("x_im"), path) for p in procs])
        t = np.array([float(p["t"]) for p in procs])
        ks = [p.get("k") for p in procs]
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: malformed protocol ({exc})") from exc
    if X.ndim != 2 or X.shape[1] != s:
        raise DataError(f"{path}: every process needs {s} amplitudes")
    if any(k is None for k in ks) and not all(k is None for k in ks):
        raise DataError(f"{path}: counts must be given for all processes or none")
    k = None if ks[0] is None else np.array(ks, dtype=float)
    return MeasurementProtocol(X, t, k)


def write_counts(path, counts: RegisterCounts, U=None):
    obj = {"s": counts.s, "n_counts": counts.n_counts.tolist(), "m_counts": counts.m_counts.tolist()}
    if U is not None:
        obj["u_re"] = np.real(U).tolist()
        obj["u_im"] = np.imag(U).tolist()
    _write_json(path, obj)


def read_counts(path):
    obj = _read_json(path, "counts")
    try:
        counts = RegisterCounts(obj["n_counts"], obj["m_counts"])
    except (KeyError, TypeError) as exc:
        raise DataError(f"{path}: malformed counts ({exc})") from exc
    if "s" in obj and int(obj["s"]) != counts.s:
        raise DataError(f"{path}: 's' disagrees with the count vectors")
    U = _complex(obj["u_re"], obj.get("u_im"), path) if "u_re" in obj else dft_unitary(counts.s)
    return counts, U


# ---------------------------------------------------------------- configuration

def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        data = _read_json(args.config, "config")
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = sorted(set(data) - set(DEFAULTS))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        cfg.update(data)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if cfg["seed"] is None:
        env = os.environ.get("ROOTSTAT_SEED")
        if env is not None:
            try:
                cfg["seed"] = int(env)
            except ValueError:
                raise ConfigError(f"ROOTSTAT_SEED must be an integer, got {env!r}") from None
        else:
            cfg["seed"] = 0
    if not isinstance(cfg["seed"], int) or cfg["seed"] < 0:
        raise ConfigError("seed must be a non-negative integer")
    if not 0 < float(cfg["alpha"]) < 1:
        raise ConfigError("alpha must lie in (0, 1)")
    return cfg


def _need(cfg, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise ConfigError("missing required setting(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def _mode(cfg):
    _need(cfg, "mode")
    if cfg["mode"] not in MODES:
        raise ConfigError(f"mode must be one of {MODES}")
    return cfg["mode"]


def _solver_options(cfg) -> SolverOptions:
    try:
        return SolverOptions(max_iter=int(cfg["max_iter"]), tol=float(cfg["tol"]),
                             mixing=float(cfg["mixing"]), init=cfg["init"])
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------- simulate

def _random_state(s, rng) -> np.ndarray:
    c = rng.normal(size=s) + 1j * rng.normal(size=s)
    return c / np.linalg.norm(c)


def cmd_simulate(cfg) -> int:
    mode = _mode(cfg)
    out = Path(cfg["out"] or ".")
    out.mkdir(parents=True, exist_ok=True)
    truth_rng, x_rng, p_rng = (np.random.default_rng(s) for s in np.random.SeedSequence(cfg["seed"]).spawn(3))
    files = {}
    if mode == "poisson":
        _need(cfg, "protocol", "truth")
        protocol = read_protocol(cfg["protocol"])
        c = read_truth(cfg["truth"])
        if c.size != protocol.s:
            raise ConfigError(f"truth has {c.size} components, protocol {protocol.s}")
        sim = simulate_poisson(protocol.X, c, protocol.t, x_rng)
        files["protocol"] = str(out / "protocol.json")
        write_protocol(files["protocol"], sim)
    else:
        if cfg["truth"] is not None:
            c = read_truth(cfg["truth"])
            c = c / np.linalg.norm(c)
        else:
            _need(cfg, "basis_size")
            c = _random_state(int(cfg["basis_size"]), truth_rng)
        n, m = int(cfg["n"]), int(cfg["m"])
        if mode == "continuous":
            basis = HermiteBasis(c.size, float(cfg["scale"]))
            files["samples_x"] = str(out / "samples_x.csv")
            files["samples_p"] = str(out / "samples_p.csv")
            write_samples(files["samples_x"], sample_coordinate(c, basis, n, x_rng))
            write_samples(files["samples_p"], sample_momentum(c, basis, m, p_rng))
        else:
            U = dft_unitary(c.size)
            files["counts"] = str(out / "counts.json")
            write_counts(files["counts"], sample_register(c, U, n, m, x_rng), U)
    files["truth"] = str(out / "truth.json")
    write_truth(files["truth"], c)
    _write_json(out / "manifest.json", {"command": "simulate", "config": cfg, "files": files,
                                        "version": __version__})
    print(f"wrote {', '.join(files.values())}")
    return EXIT_OK


# ---------------------------------------------------------------- estimate

def _list(a):
    return [float(v) for v in np.asarray(a, dtype=float).ravel()]


def _is_real(X) -> bool:
    X = np.asarray(X)
    return bool(np.all(np.abs(X.imag) <= 1e-14 * np.abs(X).max()))


def _estimate(cfg, mode, opts):
    """Return (state, diagnostics, H, n_total, normalized, real_protocol)."""
    if mode == "continuous":
        _need(cfg, "basis_size")
        if cfg["samples_x"] is None and cfg["samples_p"] is None:
            raise ConfigError("continuous mode needs --samples-x and/or --samples-p")
        xs = read_samples(cfg["samples_x"]) if cfg["samples_x"] else np.empty(0)
        ps = read_samples(cfg["samples_p"]) if cfg["samples_p"] else np.empty(0)
        samples = SampleSet(xs, ps)
        s = int(cfg["basis_size"])
        basis = HermiteBasis(s, float(cfg["scale"]))
        state, diag = solve_continuous(samples, basis, s, opts)
        H = expected_continuous_info(basis, state.coeffs, samples.n, samples.m).H
        return state, diag, H, float(samples.total), True, samples.m == 0
    if mode == "register":
        _need(cfg, "counts")
        counts, U = read_counts(cfg["counts"])
        if cfg["basis_size"] is not None and int(cfg["basis_size"]) != counts.s:
            raise ConfigError(f"basis size {cfg['basis_size']} does not match {counts.s} count bins")
        if not is_unitary(U):
            raise ConfigError("transform in the counts file is not unitary")
        state, diag = solve_register(counts, U, opts)
        H = info_matrices(register_protocol(counts, U), state.coeffs).H
        return state, diag, H, float(counts.total), True, _is_real(U)
    _need(cfg, "protocol")
    protocol = read_protocol(cfg["protocol"])
    if protocol.k is None:
        raise ConfigError("protocol file has no counts 'k'; run simulate first or add them")
    state, info, diag = solve_poisson(protocol, opts)
    return state, diag, info.H, float(protocol.total_counts), False, _is_real(protocol.X)


def _report(cfg, mode, c, diag, H, n_total, normalized, real_protocol):
    c = np.asarray(c, dtype=complex)
    verdict = completeness_check(H, state=c)
    expected = n_total
    report = {
        "mode": mode, "s": int(c.size),
        "c_re": _list(c.real), "c_im": _list(c.imag),
        "converged": bool(diag.converged), "iterations": int(diag.iterations), "residual": diag.residual,
        "loglik": diag.loglik,
        "lambda_check": {"eigenvalue": diag.eigenvalue, "expected": expected,
                         "relative_gap": abs(diag.eigenvalue - expected) / expected if expected else None},
        "H_eigenvalues": _list(verdict.eigenvalues),
        "completeness": verdict.as_dict(),
        "warnings": list(diag.warnings),
    }
    if verdict.complete:
        report["principal_variances"] = [f.variance for f in principal_fluctuations(H)]
    cn = c / np.linalg.norm(c)
    cone = confidence_cone(cn, n_total, float(cfg["alpha"]))
    report["alpha"] = float(cfg["alpha"])
    report["cone_half_angle_rad"] = cone.half_angle
    if cfg["truth"] is not None:
        truth = read_truth(cfg["truth"])
        if truth.size != c.size:
            raise ConfigError(f"truth has {truth.size} components, estimate {c.size}")
        if normalized:
            truth = truth / np.linalg.norm(truth)
        fr = informational_fidelity(H, truth, c, n_total=n_total, resolve_conjugation=real_protocol)
        f = fidelity(cn, truth / np.linalg.norm(truth))
        if real_protocol:
            f = max(f, fidelity(cn, np.conj(truth) / np.linalg.norm(truth)))
        report["fidelity"] = {"fidelity": f, "cone_statistic": 4 * n_total * (1 - f),
                              "inside_cone": bool(np.arcsin(math.sqrt(max(1 - f, 0))) <= cone.half_angle),
                              "F_H": fr.F_H, "loss": fr.loss, "statistic": fr.statistic, "dof": fr.dof,
                              "n_total": fr.n_total, "info_norm": fr.info_norm,
                              "identity_gap": fr.identity_gap}
    return report


def cmd_estimate(cfg) -> int:
    mode = _mode(cfg)
    opts = _solver_options(cfg)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            state, diag, H, n_total, normalized, real_protocol = _estimate(cfg, mode, opts)
    except ConvergenceError as exc:
        diag = exc.diagnostics
        c = gauge_fix(np.asarray(exc.best, dtype=complex))
        report = {"mode": mode, "converged": False, "error": str(exc),
                  "c_re": _list(c.real), "c_im": _list(c.imag),
                  "iterations": diag.iterations if diag else None,
                  "residual": diag.residual if diag else None,
                  "loglik": diag.loglik if diag else None}
        _write_json(cfg["out"], report)
        print(f"rootstat: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    report = _report(cfg, mode, state.coeffs, diag, H, n_total, normalized, real_protocol)
    _write_json(cfg["out"], report)
    return EXIT_OK


# ---------------------------------------------------------------- fig1

def cmd_fig1(cfg) -> int:
    n, p1 = int(cfg["fig_n"]), float(cfg["p1"])
    try:
        rep = binomial_approx_report(n, p1)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    from scipy.special import ndtr
    from scipy.stats import binom

    from .stattest import ml_stat, root_normal_stat
    k = np.arange(n + 1)
    pmf = binom.pmf(k, n, p1)

    def cell(z):
        lo = np.where(k == 0, -np.inf, z(k - 0.5))
        hi = np.where(k == n, np.inf, z(k + 0.5))
        return ndtr(hi) - ndtr(lo)

    root = cell(lambda x: root_normal_stat(np.clip(x, 0, n), n - np.clip(x, 0, n), p1))
    ml = cell(lambda x: ml_stat(x, n, p1))
    print("k\texact\troot\tmoivre_laplace")
    for row in zip(k, pmf, root, ml):
        if row[1] > 1e-12:
            print(f"{int(row[0])}\t{float(row[1])!r}\t{float(row[2])!r}\t{float(row[3])!r}")
    print(f"mae_root={float(rep.mae_root)!r} mae_ml={float(rep.mae_ml)!r} ratio={float(rep.ratio)!r}")
    if cfg["out"]:
        _write_json(cfg["out"], {"n": n, "p1": p1, "mae_root": rep.mae_root, "mae_ml": rep.mae_ml,
                                 "ratio": rep.ratio, "diagnostics": rep.diagnostics})
    return EXIT_OK


# ---------------------------------------------------------------- dynamics

def _potential(cfg):
    spec = cfg["potential"]
    if isinstance(spec, str):
        spec = {"kind": spec}
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("potential must be a name or an object with a 'kind'")
    kind = spec["kind"]
    extra = {k: v for k, v in spec.items() if k != "kind"}
    try:
        if kind == "harmonic":
            return harmonic(**extra)
        if kind == "quartic":
            return quartic(**extra)
        if kind == "table":
            if cfg["potential_table"] is not None:
                with open(cfg["potential_table"], newline="") as fh:
                    rows = [r for r in csv.DictReader(fh)]
                xs = [float(r["x"]) for r in rows]
                us = [float(r["U"]) for r in rows]
            else:
                xs, us = extra.pop("x"), extra.pop("U")
            return table(xs, us, **extra)
    except OSError as exc:
        raise DataError(f"cannot read potential table: {exc}") from exc
    except (TypeError, KeyError, ValueError) as exc:
        raise ConfigError(f"bad potential specification: {exc}") from exc
    raise ConfigError(f"unknown potential kind {kind!r}; use harmonic, quartic or table")


def cmd_dynamics(cfg) -> int:
    pot = _potential(cfg)
    s = int(cfg["basis_size"] or 20)
    try:
        grid = Grid(float(cfg["grid_lo"]), float(cfg["grid_hi"]), int(cfg["grid_n"]))
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", BoundaryLeakWarning)
        if cfg["control_scale"] is not None:
            eig = basis_eigensystem(pot, grid, HermiteBasis(s, float(cfg["control_scale"])), s, cfg["scheme"])
        else:
            eig = solve_eigensystem(pot, grid, s, scheme=cfg["scheme"], strict=bool(cfg["strict"]))
    notes = [str(w.message) for w in caught]
    h_res = heisenberg_residual(eig)
    coeffs = np.array([1 / math.sqrt(math.factorial(j)) for j in range(s)])
    density = MixedRootDensity(coeffs / np.linalg.norm(coeffs), eig.frequencies)
    dt, t_max = float(cfg["dt"]), float(cfg["t_max"])
    t_grid = np.arange(int(round(t_max / dt)) + 1) * dt
    e_res = ehrenfest_check(density, eig, t_grid=t_grid)
    ok = h_res < float(cfg["heisenberg_max"]) and e_res < float(cfg["ehrenfest_max"])
    report = {"potential": pot.name, "scheme": eig.scheme, "s": s,
              "grid": {"lo": grid.lo, "hi": grid.hi, "n": grid.n},
              "frequencies": _list(eig.frequencies), "boundary_leak": eig.leak,
              "heisenberg_residual": h_res, "ehrenfest_residual": e_res,
              "degenerate_pairs": degenerate_pairs(eig),
              "thresholds": {"heisenberg": float(cfg["heisenberg_max"]), "ehrenfest": float(cfg["ehrenfest_max"])},
              "pass": bool(ok), "warnings": notes}
    for note in notes:
        print(f"warning: {note}", file=sys.stderr)
    print(f"heisenberg_residual={float(h_res)!r} ehrenfest_residual={float(e_res)!r} {'PASS' if ok else 'FAIL'}")
    if cfg["out"]:
        _write_json(cfg["out"], report)
    return EXIT_OK if ok else EXIT_CONVERGENCE


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of settings (flags override it)")
    common.add_argument("--seed", type=int, help="random seed (fallback: ROOTSTAT_SEED, then 0)")
    common.add_argument("--out", help="output directory (simulate) or file, '-' for stdout")
    common.add_argument("--strict", action="store_true", default=None, help="escalate boundary-leak warnings")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--mode", choices=MODES)
    model.add_argument("--basis-size", type=int, dest="basis_size")
    model.add_argument("--scale", type=float, help="length unit of the Hermite basis")
    model.add_argument("--samples-x", dest="samples_x")
    model.add_argument("--samples-p", dest="samples_p")
    model.add_argument("--protocol")
    model.add_argument("--counts")
    model.add_argument("--truth")

    parser = argparse.ArgumentParser(prog="rootstat", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", parents=[common, model], help="generate synthetic data")
    sim.add_argument("--n", type=int, help="coordinate samples / computational-basis shots")
    sim.add_argument("--m", type=int, help="momentum samples / conjugate-basis shots")

    est = sub.add_parser("estimate", parents=[common, model], help="reconstruct a state from data")
    est.add_argument("--alpha", type=float, help="cone significance level (default 0.05)")
    est.add_argument("--tol", type=float)
    est.add_argument("--max-iter", type=int, dest="max_iter")
    est.add_argument("--mixing", type=float)
    est.add_argument("--init", choices=("auto", "uniform", "data"))

    fig = sub.add_parser("fig1", parents=[common], help="root vs Moivre-Laplace binomial approximation")
    fig.add_argument("--n", type=int, dest="fig_n", help="number of trials (default 100)")
    fig.add_argument("--p1", type=float, help="success probability (default 0.2)")

    dyn = sub.add_parser("dynamics", parents=[common], help="Heisenberg and Ehrenfest residuals")
    dyn.add_argument("--potential", choices=("harmonic", "quartic", "table"))
    dyn.add_argument("--potential-table", dest="potential_table", help="CSV with columns x,U")
    dyn.add_argument("--basis-size", type=int, dest="basis_size", help="number of eigenpairs (default 20)")
    dyn.add_argument("--grid-lo", type=float, dest="grid_lo")
    dyn.add_argument("--grid-hi", type=float, dest="grid_hi")
    dyn.add_argument("--grid-n", type=int, dest="grid_n")
    dyn.add_argument("--scheme", choices=("sinc", "fd2"))
    dyn.add_argument("--control-scale", type=float, dest="control_scale",
                     help="use Hermite functions of this scale instead of the eigenbasis (negative control)")
    dyn.add_argument("--heisenberg-max", type=float, dest="heisenberg_max")
    dyn.add_argument("--ehrenfest-max", type=float, dest="ehrenfest_max")
    dyn.add_argument("--dt", type=float)
    dyn.add_argument("--t-max", type=float, dest="t_max")
    return parser


COMMANDS = {"simulate": cmd_simulate, "estimate": cmd_estimate, "fig1": cmd_fig1, "dynamics": cmd_dynamics}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"rootstat: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IncompleteProtocolError as exc:
        print(f"rootstat: {exc}", file=sys.stderr)
        return EXIT_INCOMPLETE
    except (DataError, OSError) as exc:
        print(f"rootstat: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (BoundaryLeakError, SingularLikelihoodError) as exc:
        print(f"rootstat: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except DomainError as exc:
        print(f"rootstat: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
