"""Fisher, covariance and complete information matrices.

Two settings live here:

* the real chart c_0 = sqrt(1 - sum_{j>=1} c_j^2) of a normalized real
  psi-function, where the Fisher matrix has a closed, basis-free form;
* mutually complementary Poisson processes with amplitudes M = X c, where
  the hermitian (I), empirical (J) and symmetric (K) matrices combine into
  the real 2s x 2s complete information matrix H.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.hermite import hermgauss

from .basisfn import HermiteBasis
from .errors import (
    DegenerateParameterizationError,
    DomainError,
    IncompleteProtocolError,
    SingularLikelihoodError,
)
from .statevec import _coeffs, double

ZERO_EIG_TOL = 1e-8
GAUGE_ANGLE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class MeasurementProtocol:
    """Instrumental matrix ``X`` (processes x components), exposure times ``t`` and counts ``k``.

    ``k`` may be ``None`` for a protocol that has not been run yet.
    """

    X: np.ndarray
    t: np.ndarray
    k: np.ndarray | None = None

    def __post_init__(self):
        X = np.array(self.X, dtype=complex)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DomainError(f"instrumental matrix must be 2-D and non-empty, got shape {X.shape}")
        t = np.array(self.t, dtype=float).reshape(-1)
        if t.size != X.shape[0]:
            raise DomainError(f"{X.shape[0]} processes but {t.size} exposure times")
        if np.any(t <= 0) or not np.all(np.isfinite(t)):
            raise DomainError("exposure times must be positive and finite")
        k = self.k
        if k is not None:
            k = np.array(k, dtype=float).reshape(-1)
            if k.size != X.shape[0]:
                raise DomainError(f"{X.shape[0]} processes but {k.size} counts")
            if np.any(k < 0) or not np.all(np.isfinite(k)):
                raise DomainError("counts must be non-negative")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "k", k)

    @property
    def s(self) -> int:
        return self.X.shape[1]

    @property
    def n_processes(self) -> int:
        return self.X.shape[0]

    @property
    def total_counts(self) -> float:
        return float(self._counts().sum())

    def with_counts(self, k) -> "MeasurementProtocol":
        return MeasurementProtocol(self.X, self.t, k)

    def _counts(self) -> np.ndarray:
        if self.k is None:
            raise DomainError("protocol has no observed counts")
        return self.k


@dataclass(frozen=True, eq=False)
class InfoMatrices:
    I: np.ndarray
    J: np.ndarray
    K: np.ndarray
    H: np.ndarray


@dataclass
class CompletenessVerdict:
    complete: bool
    message: str
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    n_zero: int
    n_negative: int
    zero_mode: np.ndarray | None = None
    gauge_angle: float | None = None
    tolerance: float = ZERO_EIG_TOL

    def __bool__(self):
        return self.complete

    def as_dict(self) -> dict:
        return {
            "complete": self.complete,
            "message": self.message,
            "n_zero": self.n_zero,
            "n_negative": self.n_negative,
            "gauge_angle_rad": self.gauge_angle,
            "tolerance": self.tolerance,
        }


@dataclass
class Fluctuation:
    variance: float
    direction: np.ndarray
    eigenvalue: float = field(repr=False, default=float("nan"))

    def __iter__(self):
        yield self.variance
        yield self.direction


# ---------------------------------------------------------------- real chart

def _chart(c) -> np.ndarray:
    c = np.asarray(c, dtype=float).reshape(-1)
    if c.size < 2:
        raise DomainError("the chart needs s >= 2")
    if c[0] <= 0:
        raise DegenerateParameterizationError(f"c_0 must be positive, got {c[0]!r}")
    return c


def fisher_analytic(c, n: float) -> np.ndarray:
    """Closed-form Fisher matrix 4n (delta_ij + c_i c_j / c_0^2), i, j = 1..s-1.

    ``c`` is the full real coefficient vector (c_0 first). Nothing about the
    basis enters.
    """
    c = _chart(c)
    tail = c[1:]
    return 4.0 * n * (np.eye(tail.size) + np.outer(tail, tail) / c[0] ** 2)


def fisher_quadrature(c, basis: HermiteBasis, n: float, nodes: int | None = None) -> np.ndarray:
    """Fisher matrix 4n int dpsi/dc_i dpsi/dc_j dx by Gauss-Hermite quadrature.

    Uses dpsi/dc_i = phi_i - (c_i/c_0) phi_0. Products of Hermite functions
    are polynomial times exp(-x^2), so enough nodes make this exact.
    """
    c = _chart(c)
    s = c.size
    if s > basis.size:
        raise DomainError(f"state has {s} components but basis only {basis.size}")
    nodes = nodes or max(basis.size + 8, 32)
    t, w = hermgauss(nodes)
    x = t * basis.scale
    weights = w * np.exp(t * t) * basis.scale
    phi = basis.values(x, s)
    grad = phi[1:] - np.outer(c[1:] / c[0], phi[0])
    return 4.0 * n * (grad * weights) @ grad.T


def chart_jacobian(c) -> np.ndarray:
    """d(c_0..c_{s-1}) / d(c_1..c_{s-1}) for the normalized real chart."""
    c = _chart(c)
    A = np.vstack([-c[1:] / c[0], np.eye(c.size - 1)])
    return A


def covariance_full(c, n: float) -> np.ndarray:
    """Covariance (delta_ij - c_i c_j) / (4n) of all s components, i.e. (E - rho)/(4n)."""
    c = np.asarray(c, dtype=float).reshape(-1)
    return (np.eye(c.size) - np.outer(c, c)) / (4.0 * n)


# ---------------------------------------------------------- Poisson protocol

def amplitudes(protocol_or_X, c) -> np.ndarray:
    X = protocol_or_X.X if isinstance(protocol_or_X, MeasurementProtocol) else np.asarray(protocol_or_X)
    c = _coeffs(c)
    if X.shape[1] != c.size:
        raise DomainError(f"instrumental matrix has {X.shape[1]} columns, state has {c.size} components")
    return X @ c


def intensity(protocol_or_X, c) -> np.ndarray:
    """Event rates lambda_nu = |(X c)_nu|^2."""
    return np.abs(amplitudes(protocol_or_X, c)) ** 2


def hermitian_fisher(protocol: MeasurementProtocol) -> np.ndarray:
    """I = X^H diag(t) X; depends on the protocol only."""
    X = protocol.X
    I = X.conj().T @ (protocol.t[:, None] * X)
    return 0.5 * (I + I.conj().T)


def _ratio(k, denom, what) -> np.ndarray:
    """k / denom with 0/0 := 0; a positive k over a zero denominator is singular."""
    k = np.asarray(k, dtype=float)
    bad = (k > 0) & (denom == 0)
    if np.any(bad):
        raise SingularLikelihoodError(
            f"positive counts on zero {what} for processes {np.flatnonzero(bad).tolist()}")
    out = np.zeros(np.broadcast(k, denom).shape, dtype=np.result_type(denom, float))
    nz = k > 0
    out[nz] = k[nz] / denom[nz]
    return out


def empirical_fisher(protocol: MeasurementProtocol, lam) -> np.ndarray:
    """J = X^H diag(k/lambda) X."""
    w = _ratio(protocol._counts(), np.asarray(lam, dtype=float), "intensity")
    X = protocol.X
    J = X.conj().T @ (w[:, None] * X)
    return 0.5 * (J + J.conj().T)


def symmetric_fisher(protocol: MeasurementProtocol, M) -> np.ndarray:
    """K = X^T diag(k / M^2) X.

    The complex square M^2 (not |M|^2) is what makes K symmetric rather than
    hermitian.
    """
    M = np.asarray(M, dtype=complex)
    w = _ratio(protocol._counts(), M * M, "amplitude")
    X = protocol.X
    K = X.T @ (w[:, None] * X)
    return 0.5 * (K + K.T)


def complete_info(I, K) -> np.ndarray:
    """Real 2s x 2s matrix [[Re(I+K), -Im(I+K)], [Im(I-K), Re(I-K)]]."""
    I = np.asarray(I, dtype=complex)
    K = np.asarray(K, dtype=complex)
    if I.shape != K.shape or I.ndim != 2 or I.shape[0] != I.shape[1]:
        raise DomainError(f"I and K must be square and equal-sized, got {I.shape} and {K.shape}")
    P, Q = I + K, I - K
    H = np.block([[P.real, -P.imag], [Q.imag, Q.real]])
    asym = np.max(np.abs(H - H.T), initial=0.0)
    if asym > 1e-10 * max(np.max(np.abs(H), initial=0.0), 1.0):
        raise DomainError(f"complete information matrix is not symmetric (max asymmetry {asym:.3e})")
    return 0.5 * (H + H.T)


def info_matrices(protocol: MeasurementProtocol, c) -> InfoMatrices:
    """All four matrices of a counted protocol evaluated at state ``c``."""
    M = amplitudes(protocol, c)
    I = hermitian_fisher(protocol)
    J = empirical_fisher(protocol, np.abs(M) ** 2)
    K = symmetric_fisher(protocol, M)
    return InfoMatrices(I=I, J=J, K=K, H=complete_info(I, K))


def gauge_direction(c) -> np.ndarray:
    """Unit real-doubled direction of the infinitesimal phase rotation c -> c + i eps c."""
    v = double(1j * _coeffs(c)).xi
    return v / np.linalg.norm(v)


def completeness_check(H, tolerance: float = ZERO_EIG_TOL, state=None) -> CompletenessVerdict:
    """Check that H has exactly one zero eigenvalue and all others positive.

    Eigenvalues with |h| < tolerance * max|h| count as zero. When ``state`` is
    given, the zero mode must also be parallel to the gauge direction
    double(i c) within 1e-6 rad.
    """
    H = np.asarray(H, dtype=float)
    h, V = np.linalg.eigh(0.5 * (H + H.T))
    scale = np.max(np.abs(h), initial=0.0)
    if scale == 0:
        return CompletenessVerdict(False, "information matrix vanishes", h, V, h.size, 0, tolerance=tolerance)
    cut = tolerance * scale
    zero = np.abs(h) < cut
    negative = h <= -cut
    n_zero, n_neg = int(zero.sum()), int(negative.sum())
    verdict = CompletenessVerdict(False, "", h, V, n_zero, n_neg, tolerance=tolerance)
    if n_zero >= 1:
        verdict.zero_mode = V[:, int(np.argmin(np.abs(h)))]
    if n_neg:
        verdict.message = f"not a likelihood maximum: {n_neg} negative eigenvalue(s)"
    elif n_zero == 0:
        verdict.message = "no zero eigenvalue: information is not gauge invariant (over-constrained input)"
    elif n_zero > 1:
        verdict.message = f"incomplete: {n_zero} near-zero eigenvalues, directions besides the gauge are unconstrained"
    else:
        verdict.complete = True
        verdict.message = "complete"
    if state is not None and verdict.zero_mode is not None:
        g = gauge_direction(state)
        z = verdict.zero_mode
        # the sine (norm of the orthogonal part) keeps small angles accurate
        sinang = np.linalg.norm(z - (g @ z) * g)
        verdict.gauge_angle = float(np.arctan2(sinang, abs(g @ z)))
        if verdict.complete and verdict.gauge_angle > GAUGE_ANGLE_TOL:
            verdict.complete = False
            verdict.message = f"zero mode deviates from the gauge direction by {verdict.gauge_angle:.3e} rad"
    return verdict


def principal_fluctuations(H, tolerance: float = ZERO_EIG_TOL) -> list[Fluctuation]:
    """Principal variances 1/(2 h_j) and directions, largest variance first.

    The single gauge mode is dropped; H must pass ``completeness_check``.
    """
    verdict = completeness_check(H, tolerance)
    if not verdict.complete:
        raise IncompleteProtocolError(verdict.message)
    h, V = verdict.eigenvalues, verdict.eigenvectors
    keep = np.argsort(np.abs(h))[1:]
    keep = keep[np.argsort(h[keep])]
    return [Fluctuation(1.0 / (2.0 * h[i]), V[:, i], h[i]) for i in keep]
