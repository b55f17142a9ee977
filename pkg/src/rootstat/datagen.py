"""Synthetic data for the three measurement models and a seeded Monte Carlo harness.

Every generator is a pure function of its inputs and ``seed``; ``seed`` may be
an integer or an existing ``numpy.random.Generator`` (which is advanced).
"""
from __future__ import annotations

import concurrent.futures
import traceback
from typing import Callable

import numpy as np

from .basisfn import HermiteBasis
from .errors import DomainError, EnvelopeError
from .infomat import MeasurementProtocol, intensity
from .mlsolve import RegisterCounts
from .statevec import StateVector, _coeffs, density_at, momentum_density_at

MIN_ACCEPTANCE = 1e-3
ENVELOPE_MARGIN = 1.2


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _checked_state(state) -> np.ndarray:
    c = _coeffs(state)
    if isinstance(state, StateVector) and not state.normalized:
        raise DomainError("sampling needs a normalized state")
    if abs(np.vdot(c, c).real - 1) > 1e-10:
        raise DomainError("sampling needs a normalized state")
    return c


def _envelope(c, density: Callable, unit: float):
    """Gaussian envelope N(0, sigma^2) and constant C with density <= C * envelope.

    sigma^2 = (j_max + 1/2) unit^2 matches the spread of the highest Hermite
    function in use; C is a grid-scanned bound times a 1.2 safety margin.
    """
    support = np.flatnonzero(np.abs(c) > 0)
    jmax = int(support[-1]) if support.size else 0
    sigma = unit * np.sqrt(jmax + 0.5)
    reach = unit * (np.sqrt(2 * jmax + 1) + 10.0)
    grid = np.linspace(-reach, reach, 8001)
    gauss = np.exp(-0.5 * (grid / sigma) ** 2) / (sigma * np.sqrt(2 * np.pi))
    C = ENVELOPE_MARGIN * float(np.max(density(grid) / gauss))
    if not np.isfinite(C) or 1.0 / C < MIN_ACCEPTANCE:
        raise EnvelopeError(f"envelope acceptance rate {1.0 / C:.2e} is below {MIN_ACCEPTANCE}")
    return sigma, C


def _rejection(density: Callable, sigma: float, C: float, n: int, rng) -> np.ndarray:
    out = np.empty(n)
    filled = 0
    while filled < n:
        batch = int(np.ceil(1.1 * C * (n - filled))) + 16
        x = rng.normal(0.0, sigma, size=batch)
        u = rng.random(batch)
        gauss = np.exp(-0.5 * (x / sigma) ** 2) / (sigma * np.sqrt(2 * np.pi))
        keep = x[u * C * gauss <= density(x)]
        take = min(keep.size, n - filled)
        out[filled:filled + take] = keep[:take]
        filled += take
    return out


def sample_coordinate(state, basis: HermiteBasis, n: int, seed=None) -> np.ndarray:
    """``n`` i.i.d. draws from |psi(x)|^2 by Gaussian-envelope rejection."""
    c = _checked_state(state)
    if n < 0:
        raise DomainError("sample size must be non-negative")
    if n == 0:
        return np.empty(0)
    dens = lambda x: density_at(c, basis, x)
    sigma, C = _envelope(c, dens, basis.scale)
    return _rejection(dens, sigma, C, n, rng_from(seed))


def sample_momentum(state, basis: HermiteBasis, m: int, seed=None) -> np.ndarray:
    """``m`` i.i.d. draws from the momentum density |psi~(p)|^2."""
    c = _checked_state(state)
    if m < 0:
        raise DomainError("sample size must be non-negative")
    if m == 0:
        return np.empty(0)
    dens = lambda p: momentum_density_at(c, basis, p)
    sigma, C = _envelope(c, dens, 1.0 / basis.scale)
    return _rejection(dens, sigma, C, m, rng_from(seed))


def sample_register(state, U, n: int, m: int, seed=None) -> RegisterCounts:
    """Multinomial counts: ``n`` shots in the computational basis, ``m`` after applying ``U``."""
    c = _checked_state(state)
    U = np.asarray(U, dtype=complex)
    if U.shape != (c.size, c.size):
        raise DomainError(f"transform shape {U.shape} does not match state size {c.size}")
    rng = rng_from(seed)
    p = np.abs(c) ** 2
    q = np.abs(U @ c) ** 2
    return RegisterCounts(rng.multinomial(n, p / p.sum()), rng.multinomial(m, q / q.sum()))


def simulate_poisson(X, c_true, t, seed=None) -> MeasurementProtocol:
    """Protocol with counts k_nu ~ Poisson(lambda_nu t_nu), lambda = |X c|^2."""
    if isinstance(X, MeasurementProtocol):
        X = X.X
    protocol = MeasurementProtocol(X, t)
    lam = intensity(protocol, c_true)
    k = rng_from(seed).poisson(lam * protocol.t)
    return protocol.with_counts(k)


# ---------------------------------------------------------------- harness

def trial_seed(base_seed: int, index: int) -> int:
    """64-bit seed of trial ``index``; independent of how many trials run or in what order."""
    ss = np.random.SeedSequence([int(base_seed), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _run_one(trial: Callable, base_seed: int, index: int) -> dict:
    seed = trial_seed(base_seed, index)
    row = {"trial": index, "seed": seed, "error": None}
    try:
        stats = trial(np.random.default_rng(seed))
        row.update(stats or {})
    except Exception as exc:  # recorded per trial, never aborts the run
        row["error"] = f"{type(exc).__name__}: {exc}"
        row["traceback"] = traceback.format_exc(limit=3)
    return row


def monte_carlo(trial: Callable, n_trials: int, base_seed: int = 0, workers: int = 1,
                indices=None) -> list[dict]:
    """Run ``trial(rng) -> dict`` once per trial index and collect one row per trial.

    Each row carries ``trial``, ``seed`` (re-run with ``trial(default_rng(seed))``),
    ``error`` and the statistics returned by the trial. ``workers > 1`` uses
    processes, so ``trial`` must then be picklable. Rows come back sorted by
    trial index whatever the execution order.
    """
    indices = list(range(n_trials)) if indices is None else list(indices)
    if workers <= 1:
        rows = [_run_one(trial, base_seed, i) for i in indices]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_one, trial, base_seed, i) for i in indices]
            rows = [f.result() for f in futures]
    return sorted(rows, key=lambda r: r["trial"])


def column(rows: list[dict], name: str, skip_failed: bool = True) -> np.ndarray:
    return np.array([r[name] for r in rows if not (skip_failed and r["error"])])
