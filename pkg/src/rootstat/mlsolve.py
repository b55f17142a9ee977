"""Maximum-likelihood reconstruction of state vectors.

Three likelihood equations share one damped fixed-point driver:

* continuous complementary samples:  R(c) c = (n + m) c
* register counts:                   c_i = [n_i / c_i* + sum_j m_j U_ji* / (Uc)_j*] / (n + m)
* Poisson processes:                 c = I^{-1} J(c) c

Each map F is iterated as c <- (1 - a) c + a F(c). The mixing weight ``a``
is halved whenever a step would lower the log-likelihood, so accepted
iterates have a non-decreasing likelihood. Convergence is certified by the
fixed-point residual ||F(c) - c|| / ||c||.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.optimize import minimize_scalar

from .basisfn import HermiteBasis, is_unitary
from .errors import (
    CompletenessWarning,
    ConvergenceError,
    DomainError,
    IncompleteProtocolError,
    SampleSizeWarning,
    SingularLikelihoodError,
)
from .infomat import (
    CompletenessVerdict,
    InfoMatrices,
    MeasurementProtocol,
    _ratio,
    complete_info,
    completeness_check,
    hermitian_fisher,
    info_matrices,
)
from .statevec import StateVector, gauge_fix

DENSITY_FLOOR = 1e-300
MIN_MIXING = 1e-10
SADDLE_ESCAPES = 4
SADDLE_MAX_DIM = 200


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Coordinate samples ``xs`` and momentum samples ``ps`` from complementary experiments."""

    xs: np.ndarray = field(default_factory=lambda: np.empty(0))
    ps: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float).reshape(-1)
        ps = np.array(self.ps, dtype=float).reshape(-1)
        if xs.size + ps.size < 1:
            raise DomainError("need at least one sample")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ps))):
            raise DomainError("samples must be finite")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ps", ps)

    @property
    def n(self) -> int:
        return self.xs.size

    @property
    def m(self) -> int:
        return self.ps.size

    @property
    def total(self) -> int:
        return self.n + self.m


@dataclass(frozen=True, eq=False)
class RegisterCounts:
    """Outcome counts in the computational (``n_counts``) and conjugate (``m_counts``) bases."""

    n_counts: np.ndarray
    m_counts: np.ndarray

    def __post_init__(self):
        n = np.array(self.n_counts, dtype=np.int64).reshape(-1)
        m = np.array(self.m_counts, dtype=np.int64).reshape(-1)
        if n.size != m.size or n.size < 1:
            raise DomainError(f"count vectors must have equal positive length, got {n.size} and {m.size}")
        if np.any(n < 0) or np.any(m < 0):
            raise DomainError("counts must be non-negative")
        if n.sum() + m.sum() < 1:
            raise DomainError("need at least one count")
        object.__setattr__(self, "n_counts", n)
        object.__setattr__(self, "m_counts", m)

    @property
    def s(self) -> int:
        return self.n_counts.size

    @property
    def n(self) -> int:
        return int(self.n_counts.sum())

    @property
    def m(self) -> int:
        return int(self.m_counts.sum())

    @property
    def total(self) -> int:
        return self.n + self.m


@dataclass
class SolverOptions:
    """Iteration controls.

    ``init`` is ``"auto"`` (multistart), ``"uniform"``, ``"data"`` or an explicit
    vector. With ``"auto"`` every candidate start (uniform vector, its sign
    patterns, unit vectors, a data-driven start where one exists, and
    ``starts`` seeded random vectors, default ``max(8, 2s)``) is iterated
    ``screen_iter`` times; the more likely half is kept and iterated twice as
    long, and so on until one start remains, which is polished to ``tol``. ``anderson`` is
    the Anderson-acceleration depth (0 gives the plain damped iteration).

    ``saddle_check`` inspects the finite-difference Hessian of the
    log-likelihood on the tangent space after polishing; a direction of
    positive curvature marks a saddle point, which is left by a line search
    along that direction followed by a fresh polish.
    """

    max_iter: int = 20000
    tol: float = 1e-10
    mixing: float = 0.5
    init: object = "auto"
    starts: int | None = None
    screen_iter: int = 40
    start_seed: int = 0
    anderson: int = 5
    saddle_check: bool = True

    def __post_init__(self):
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise DomainError("max_iter must be a positive integer")
        if not self.tol > 0:
            raise DomainError("tol must be positive")
        if not 0 < self.mixing <= 1:
            raise DomainError("mixing must lie in (0, 1]")
        if int(self.anderson) != self.anderson or self.anderson < 0:
            raise DomainError("anderson depth must be a non-negative integer")
        if isinstance(self.init, str) and self.init not in ("auto", "uniform", "data"):
            raise DomainError(f"unknown init {self.init!r}")


@dataclass
class Diagnostics:
    converged: bool = False
    iterations: int = 0
    residual: float = float("inf")
    mixing: float = float("nan")
    loglik: float = float("nan")
    loglik_trace: list = field(default_factory=list)
    eigenvalue: float | None = None
    n_total: float | None = None
    floored: int = 0
    starts_tried: int = 1
    screen_iterations: int = 0
    saddle_escapes: int = 0
    real_chart: bool = False
    normalization_gap: float | None = None
    completeness: CompletenessVerdict | None = None
    warnings: list = field(default_factory=list)

    @property
    def lambda_ratio(self) -> float | None:
        if self.eigenvalue is None or not self.n_total:
            return None
        return self.eigenvalue / self.n_total

    def note(self, message, category=UserWarning):
        self.warnings.append(message)
        warnings.warn(message, category, stacklevel=3)


def _real(v):
    return np.concatenate([v.real, v.imag])


def _fixed_point(c0, step: Callable, loglik: Callable, opts: SolverOptions, normalize: bool,
                 diag: Diagnostics):
    """Damped iteration c <- (1 - a) c + a F(c), optionally Anderson-accelerated.

    An accelerated proposal is kept only if it does not lower the likelihood;
    otherwise the plain damped step is taken, halving ``a`` until the
    likelihood stops decreasing.
    """
    c = np.asarray(c0, dtype=complex)
    if normalize:
        c = c / np.linalg.norm(c)
    L = loglik(c)
    diag.loglik_trace = [L]
    a = opts.mixing
    hist_c, hist_g = [], []
    for it in range(opts.max_iter + 1):
        F = step(c)
        g = F - c
        diag.residual = float(np.linalg.norm(g) / np.linalg.norm(c))
        diag.iterations = it
        if diag.residual < opts.tol:
            diag.converged = True
            break
        if it == opts.max_iter:
            break
        slack = 1e-12 * max(1.0, abs(L))
        cand, Lc = None, -np.inf
        if opts.anderson and hist_c:
            dC = np.array([c - h for h in hist_c]).T
            dG = np.array([g - h for h in hist_g]).T
            A = np.vstack([dG.real, dG.imag])
            gamma = np.linalg.lstsq(A, _real(g), rcond=None)[0]
            cand = c + a * g - (dC + a * dG) @ gamma
            if normalize:
                cand = cand / np.linalg.norm(cand)
            try:
                Lc = loglik(cand)
            except SingularLikelihoodError:
                Lc = -np.inf
            if not Lc >= L - slack:
                cand = None
                hist_c.clear()
                hist_g.clear()
        if cand is None:
            while True:
                cand = (1 - a) * c + a * F
                if normalize:
                    cand = cand / np.linalg.norm(cand)
                try:
                    Lc = loglik(cand)
                except SingularLikelihoodError:
                    Lc = -np.inf
                if Lc >= L - slack:
                    break
                a *= 0.5
                if a < MIN_MIXING:
                    diag.mixing, diag.loglik = a, L
                    raise ConvergenceError(
                        f"mixing underflow after {it} iterations (residual {diag.residual:.3e})",
                        best=c, diagnostics=diag)
        if opts.anderson:
            hist_c.append(c)
            hist_g.append(g)
            if len(hist_c) > opts.anderson:
                hist_c.pop(0)
                hist_g.pop(0)
        c, L = cand, Lc
        diag.loglik_trace.append(L)
    diag.mixing, diag.loglik = a, L
    return c


def _tangent_basis(c, normalize: bool, real: bool) -> np.ndarray:
    """Orthonormal real directions at ``c`` that change the state (not its phase or norm)."""
    s = c.size
    if real:
        fixed = [c.real] if normalize else []
        dim = s
    else:
        fixed = [_real(1j * c)] + ([_real(c)] if normalize else [])
        dim = 2 * s
    fixed = np.array(fixed).T.reshape(dim, -1)
    Q = np.linalg.qr(np.hstack([fixed, np.eye(dim)]))[0]
    return Q[:, fixed.shape[1]:dim]


def _tangent_hessian(c, loglik, normalize: bool, real: bool):
    """Central-difference Hessian of the log-likelihood in the tangent directions at ``c``."""
    B = _tangent_basis(c, normalize, real)
    s, d = c.size, B.shape[1]
    h = 1e-4 * np.linalg.norm(c)

    def at(x):
        v = B @ x
        z = c + (v if real else v[:s] + 1j * v[s:])
        return loglik(z / np.linalg.norm(z) if normalize else z)

    E = np.eye(d) * h
    Hm = np.empty((d, d))
    for i in range(d):
        for j in range(i, d):
            Hm[i, j] = Hm[j, i] = (at(E[i] + E[j]) - at(E[i] - E[j]) - at(E[j] - E[i])
                                   + at(-E[i] - E[j])) / (4 * h * h)
    noise = 100 * np.finfo(float).eps * max(1.0, abs(loglik(c))) / (h * h)
    return Hm, B, noise


def _escape_saddles(c, step, loglik, opts: SolverOptions, normalize: bool, diag: Diagnostics, real: bool):
    """Leave saddle points of the likelihood along directions of positive curvature.

    The fixed-point map (and Anderson extrapolation in particular) can settle
    on, or creep towards, a stationary point that is not a maximum. Each
    escape line-searches along the most positive curvature direction and
    re-polishes; the result is kept only if its likelihood is higher.
    """
    s = c.size
    if (s if real else 2 * s) > SADDLE_MAX_DIM:
        return c
    for _ in range(SADDLE_ESCAPES):
        L0 = loglik(c)
        Hm, B, noise = _tangent_hessian(c, loglik, normalize, real)
        w, V = np.linalg.eigh(Hm)
        if w[-1] <= max(noise, 1e-8 * np.max(np.abs(w))):
            break
        v = B @ V[:, -1]
        v = v if real else v[:s] + 1j * v[s:]
        reach = 0.5 * np.linalg.norm(c)
        best = None
        for sign in (1.0, -1.0):
            def neg(t):
                z = c + sign * t * v
                try:
                    return -loglik(z / np.linalg.norm(z) if normalize else z)
                except SingularLikelihoodError:
                    return np.inf
            res = minimize_scalar(neg, bounds=(0.0, reach), method="bounded")
            if best is None or res.fun < best[0]:
                best = (res.fun, c + sign * res.x * v)
        trial = Diagnostics()
        try:
            new = _fixed_point(best[1], step, loglik, opts, normalize, trial)
        except ConvergenceError:
            break
        if not trial.loglik > L0:
            break
        diag.saddle_escapes += 1
        for name in ("converged", "iterations", "residual", "mixing", "loglik", "loglik_trace"):
            setattr(diag, name, getattr(trial, name))
        c = new
    return c


def _candidates(s: int, opts: SolverOptions, real: bool, extra=()) -> list:
    """Deterministic list of starting vectors for the ``"auto"`` multistart."""
    ones = np.ones(s, dtype=complex)
    cands = [ones]
    for bits in range(1, min(2 ** (s - 1), 32)):
        signs = np.array([1.0] + [-1.0 if bits >> j & 1 else 1.0 for j in range(s - 1)])
        cands.append(ones * signs)
    cands.extend(np.eye(s, dtype=complex)[: min(s, 16)])
    cands.extend(c for c in extra if c is not None)
    rng = np.random.default_rng(opts.start_seed)
    for _ in range(max(8, 2 * s) if opts.starts is None else opts.starts):
        z = rng.normal(size=s) if real else rng.normal(size=s) + 1j * rng.normal(size=s)
        cands.append(z.astype(complex))
    return cands


def _explicit_start(opts: SolverOptions, s: int, data_init: Callable | None):
    if isinstance(opts.init, str):
        if opts.init == "data" and data_init is not None:
            return data_init()
        return np.ones(s, dtype=complex)
    c = np.asarray(opts.init, dtype=complex).reshape(-1)
    if c.size != s:
        raise DomainError(f"initial vector has {c.size} components, expected {s}")
    if not np.any(c):
        raise DomainError("initial vector is zero")
    return c


def _screen(starts, step, loglik, screen: SolverOptions, normalize: bool, diag: Diagnostics):
    """Successive halving: iterate every start, keep the more likely half, iterate longer."""
    pool = list(starts)
    budget = screen.max_iter
    while True:
        scored = []
        for c0 in pool:
            trial = Diagnostics()
            try:
                c = _fixed_point(c0, step, loglik, replace(screen, max_iter=budget), normalize, trial)
            except ConvergenceError as exc:
                c = exc.best
            diag.screen_iterations += trial.iterations
            L = trial.loglik if np.isfinite(trial.loglik) else loglik(c)
            scored.append((L, c))
        scored.sort(key=lambda item: -item[0])
        if len(scored) == 1:
            return scored[0][1]
        pool = [c for _, c in scored[: len(scored) // 2]]
        budget *= 2


def _solve(step: Callable, loglik: Callable, s: int, opts: SolverOptions, normalize: bool,
           diag: Diagnostics, what: str, *, real: bool = False, prepare: Callable | None = None,
           data_init: Callable | None = None):
    """Run the damped iteration from the configured start(s) and return the polished iterate."""
    prepare = prepare or (lambda c: c)

    def usable(c):
        c = prepare(np.asarray(c, dtype=complex))
        try:
            if not np.isfinite(loglik(c / np.linalg.norm(c) if normalize else c)):
                return None
        except SingularLikelihoodError:
            return None
        return c

    if isinstance(opts.init, str) and opts.init == "auto":
        extra = [data_init()] if data_init is not None else []
        starts = [c for c in map(usable, _candidates(s, opts, real, extra)) if c is not None]
        if not starts:
            raise SingularLikelihoodError("every candidate start has zero likelihood")
        diag.starts_tried = len(starts)
        screen = SolverOptions(max_iter=opts.screen_iter, tol=opts.tol, mixing=opts.mixing, init=None,
                               anderson=opts.anderson)
        c0 = _screen(starts, step, loglik, screen, normalize, diag)
    else:
        c0 = usable(_explicit_start(opts, s, data_init))
        if c0 is None:
            if not (isinstance(opts.init, str) and opts.init == "uniform") or data_init is None:
                raise SingularLikelihoodError(
                    "initial vector puts zero probability on observed outcomes; perturb the start")
            diag.note("uniform start has zero amplitudes on observed outcomes; using the data-driven start")
            c0 = usable(data_init())
    c = _fixed_point(c0, step, loglik, opts, normalize, diag)
    if opts.saddle_check:
        c = _escape_saddles(c, step, loglik, opts, normalize, diag, real)
    if not diag.converged:
        raise ConvergenceError(
            f"{what} did not converge in {opts.max_iter} iterations (residual {diag.residual:.3e})",
            best=c, diagnostics=diag)
    return c


# ---------------------------------------------------------------- continuous

class _ContinuousModel:
    def __init__(self, samples: SampleSet, basis: HermiteBasis, s: int):
        if s > basis.size:
            raise DomainError(f"s = {s} exceeds basis size {basis.size}")
        self.samples, self.basis, self.s = samples, basis, s
        self.Phi_x = basis.values(samples.xs, s)
        self.Phi_p = basis.conjugate_values(samples.ps, s)

    def amplitudes(self, c):
        return c @ self.Phi_x, c @ self.Phi_p

    def densities(self, c):
        ax, ap = self.amplitudes(c)
        Px, Pp = np.abs(ax) ** 2, np.abs(ap) ** 2
        return ax, ap, np.maximum(Px, DENSITY_FLOOR), np.maximum(Pp, DENSITY_FLOOR)

    def floored(self, c) -> int:
        ax, ap = self.amplitudes(c)
        return int(np.sum(np.abs(ax) ** 2 < DENSITY_FLOOR) + np.sum(np.abs(ap) ** 2 < DENSITY_FLOOR))

    def loglik(self, c) -> float:
        _, _, Px, Pp = self.densities(c)
        return float(np.log(Px).sum() + np.log(Pp).sum())

    def r_matrix(self, c) -> np.ndarray:
        _, _, Px, Pp = self.densities(c)
        R = (self.Phi_x / Px) @ self.Phi_x.T + (self.Phi_p.conj() / Pp) @ self.Phi_p.T
        return 0.5 * (R + R.conj().T)

    def step(self, c) -> np.ndarray:
        # R c / (n + m) without forming R
        ax, ap, Px, Pp = self.densities(c)
        return (self.Phi_x @ (ax / Px) + self.Phi_p.conj() @ (ap / Pp)) / self.samples.total


def log_likelihood_continuous(samples: SampleSet, basis: HermiteBasis, c) -> float:
    """sum_k ln P(x_k | c) + sum_l ln P~(p_l | c), densities floored at 1e-300."""
    c = np.asarray(c, dtype=complex).reshape(-1)
    return _ContinuousModel(samples, basis, c.size).loglik(c)


def r_matrix(samples: SampleSet, basis: HermiteBasis, c) -> np.ndarray:
    """R_ij = sum_k phi_i*(x_k) phi_j(x_k) / P(x_k) + the same over momentum samples."""
    c = np.asarray(c, dtype=complex).reshape(-1)
    return _ContinuousModel(samples, basis, c.size).r_matrix(c)


def expected_continuous_info(basis: HermiteBasis, c, n: float, m: float, nodes: int = 160) -> InfoMatrices:
    """Model-expected I and K of a continuous complementary experiment at state ``c``.

    The data play the role of Poisson processes with amplitudes psi(x_k);
    replacing the sample sums by their expectations gives I = (n+m) E and
    K = n int phi phi^T psi*/psi dx + m int phi~ phi~^T psi~*/psi~ dp.
    """
    c = np.asarray(c, dtype=complex).reshape(-1)
    s = c.size
    t, w = hermgauss(nodes)
    K = np.zeros((s, s), dtype=complex)
    for count, unit, vals in (
        (n, basis.scale, lambda g: basis.values(g, s).astype(complex)),
        (m, 1.0 / basis.scale, lambda g: basis.conjugate_values(g, s)),
    ):
        if count == 0:
            continue
        weights = w * np.exp(t * t) * unit
        phi = vals(t * unit)
        psi = c @ phi
        mag2 = np.abs(psi) ** 2
        phase = np.where(mag2 > 0, np.conj(psi) ** 2 / np.where(mag2 > 0, mag2, 1), 0)
        K += count * (phi * (weights * phase)) @ phi.T
    K = 0.5 * (K + K.T)
    I = (n + m) * np.eye(s, dtype=complex)
    return InfoMatrices(I=I, J=I.copy(), K=K, H=complete_info(I, K))


def solve_continuous(samples: SampleSet, basis: HermiteBasis, s: int,
                     opts: SolverOptions | None = None):
    """Solve R(c) c = (n + m) c for a normalized state of ``s`` components.

    Returns ``(StateVector, Diagnostics)``; the state is gauge-fixed.
    """
    opts = opts or SolverOptions()
    model = _ContinuousModel(samples, basis, s)
    diag = Diagnostics(n_total=float(samples.total))
    if samples.total < s:
        diag.note(f"only {samples.total} samples for {s} components", SampleSizeWarning)
    # single-space data cannot see the phase, so the psi-function is taken real
    diag.real_chart = samples.m == 0 and (
        isinstance(opts.init, str) or not np.any(np.imag(np.asarray(opts.init))))
    c = _solve(model.step, model.loglik, s, opts, True, diag, "continuous likelihood equation",
               real=diag.real_chart)
    c = gauge_fix(c)
    diag.floored = model.floored(c)
    if diag.floored:
        diag.note(f"{diag.floored} sample densities fell below the floor {DENSITY_FLOOR}")
    diag.eigenvalue = float(np.vdot(c, model.r_matrix(c) @ c).real)
    info = expected_continuous_info(basis, c, samples.n, samples.m)
    diag.completeness = completeness_check(info.H, state=c)
    if not diag.completeness.complete:
        diag.note(f"continuous reconstruction: {diag.completeness.message}", CompletenessWarning)
    return StateVector(c), diag


# ------------------------------------------------------------------ register

def register_protocol(counts: RegisterCounts, U) -> MeasurementProtocol:
    """Poisson-process view of register counts: rows I (time n) stacked on U (time m).

    A side with no counts is left out.
    """
    s = counts.s
    blocks, times, ks = [], [], []
    if counts.n:
        blocks.append(np.eye(s))
        times.append(np.full(s, float(counts.n)))
        ks.append(counts.n_counts)
    if counts.m:
        blocks.append(np.asarray(U, dtype=complex))
        times.append(np.full(s, float(counts.m)))
        ks.append(counts.m_counts)
    return MeasurementProtocol(np.vstack(blocks), np.concatenate(times), np.concatenate(ks))


def solve_register(counts: RegisterCounts, U, opts: SolverOptions | None = None):
    """Solve the register likelihood equation; returns ``(StateVector, Diagnostics)``."""
    opts = opts or SolverOptions()
    U = np.asarray(U, dtype=complex)
    if U.shape != (counts.s, counts.s):
        raise DomainError(f"transform shape {U.shape} does not match {counts.s} count bins")
    if not is_unitary(U):
        raise DomainError("conjugate transform is not unitary")
    nc = counts.n_counts.astype(float)
    mc = counts.m_counts.astype(float)
    N = float(counts.total)
    diag = Diagnostics(n_total=N)

    def step(c):
        ct = U @ c
        return (_ratio(nc, np.conj(c), "amplitude") + U.conj().T @ _ratio(mc, np.conj(ct), "amplitude")) / N

    def loglik(c):
        p, q = np.abs(c) ** 2, np.abs(U @ c) ** 2
        _ratio(nc, p, "probability")
        _ratio(mc, q, "probability")
        return float(np.sum(nc[nc > 0] * np.log(p[nc > 0])) + np.sum(mc[mc > 0] * np.log(q[mc > 0])))

    def data_init():
        # one back-projection: conjugate magnitudes -> phases, computational magnitudes kept
        mags = np.sqrt((nc + 0.5) / (nc.sum() + 0.5 * nc.size))
        back = U.conj().T @ np.sqrt(mc + 0.5)
        return mags * np.exp(1j * np.angle(back))

    c = _solve(step, loglik, counts.s, opts, True, diag, "register likelihood equation",
               data_init=data_init)
    c = gauge_fix(c)
    diag.eigenvalue = float(np.vdot(c, step(c)).real * N)
    protocol = register_protocol(counts, U)
    diag.completeness = completeness_check(info_matrices(protocol, c).H, state=c)
    if not diag.completeness.complete:
        diag.note(f"register reconstruction: {diag.completeness.message}", CompletenessWarning)
    return StateVector(c), diag


# ------------------------------------------------------------------- Poisson

def poisson_loglik(protocol: MeasurementProtocol, c) -> float:
    """sum_nu k_nu ln(lambda_nu t_nu) - lambda_nu t_nu (constant terms dropped)."""
    lt = np.abs(protocol.X @ c) ** 2 * protocol.t
    k = protocol._counts()
    _ratio(k, lt, "intensity")
    pos = k > 0
    return float(np.sum(k[pos] * np.log(lt[pos])) - lt.sum())


def solve_poisson(protocol: MeasurementProtocol, opts: SolverOptions | None = None):
    """Iterate c = I^{-1} J(c) c for a non-normalized state.

    Returns ``(StateVector, InfoMatrices, Diagnostics)``. The squared norm of
    the returned state carries the total intensity.
    """
    opts = opts or SolverOptions()
    k = protocol._counts()
    n_total = float(k.sum())
    if n_total <= 0:
        raise DomainError("no events observed; the likelihood has no interior maximum")
    I = hermitian_fisher(protocol)
    ev = np.linalg.eigvalsh(I)
    if ev[0] <= 1e-12 * max(ev[-1], 0.0) or ev[-1] <= 0:
        raise IncompleteProtocolError(
            "protocol incomplete: hermitian Fisher matrix I is singular, so I^{-1} does not exist")
    I_inv = np.linalg.inv(I)
    X = protocol.X
    diag = Diagnostics(n_total=n_total)

    def step(c):
        M = X @ c
        return I_inv @ (X.conj().T @ _ratio(k, np.conj(M), "amplitude"))

    def loglik(c):
        return poisson_loglik(protocol, c)

    def prepare(c):
        # match total expected counts to the observed total
        base = np.vdot(c, I @ c).real
        return c * np.sqrt(n_total / base) if base > 0 else c

    if np.all(np.abs(X.imag) <= 1e-14 * np.abs(X).max()):
        diag.warnings.append(
            "real instrumental matrix: the likelihood is invariant under c -> conj(c), "
            "so the estimate is defined up to complex conjugation")
    c = _solve(step, loglik, protocol.s, opts, False, diag, "Poisson likelihood equation",
               prepare=prepare)
    c = gauge_fix(c)
    info = info_matrices(protocol, c)
    lam_t = float(np.sum(np.abs(X @ c) ** 2 * protocol.t))
    diag.eigenvalue = lam_t
    diag.normalization_gap = abs(n_total - lam_t) / n_total
    diag.completeness = completeness_check(info.H, state=c)
    if not diag.completeness.complete:
        diag.note(f"Poisson reconstruction: {diag.completeness.message}", CompletenessWarning)
    return StateVector(c, normalized=False), info, diag
