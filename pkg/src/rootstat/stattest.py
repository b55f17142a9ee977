"""Statistical criteria built on the root (square-root amplitude) parameterization.

Covers the root chi-square goodness-of-fit statistic, the root and
Moivre-Laplace normal approximations to the binomial, confidence cones for
reconstructed state vectors, and the informational fidelity of a
reconstruction relative to its complete information matrix.

Quantiles follow the upper-tail convention: ``chi2_quantile(alpha, k)`` is the
point exceeded with probability ``alpha``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import special

from .errors import DomainError
from .statevec import StateVector, _coeffs, align_phase, double, fidelity

PROB_SUM_TOL = 1e-12
PMF_FLOOR = 1e-12


# ---------------------------------------------------------------- chi-square utilities

def _check_dof(dof):
    if int(dof) != dof or dof < 1:
        raise DomainError(f"degrees of freedom must be a positive integer, got {dof!r}")
    return int(dof)


def _check_alpha(alpha):
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    return float(alpha)


def chi2_cdf(x, dof: int):
    """P(chi2_dof <= x), the regularized lower incomplete gamma P(dof/2, x/2)."""
    dof = _check_dof(dof)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise DomainError("chi-square argument must be non-negative")
    out = special.gammainc(dof / 2.0, x / 2.0)
    return float(out) if out.ndim == 0 else out


def chi2_quantile(alpha: float, dof: int) -> float:
    """Upper-alpha point x with P(chi2_dof > x) = alpha."""
    alpha, dof = _check_alpha(alpha), _check_dof(dof)
    x = float(special.chdtri(dof, alpha))
    # one Newton step on the upper tail pins the residual to round-off
    pdf = np.exp((dof / 2 - 1) * np.log(x) - x / 2 - special.gammaln(dof / 2) - dof / 2 * np.log(2))
    if pdf > 0 and np.isfinite(pdf):
        x += (special.gammaincc(dof / 2.0, x / 2.0) - alpha) / pdf
    return x


# ---------------------------------------------------------------- goodness of fit

def _counts_probs(counts, probs):
    counts = np.asarray(counts, dtype=float)
    probs = np.asarray(probs, dtype=float)
    if counts.shape != probs.shape or counts.ndim != 1:
        raise DomainError("counts and probabilities must be 1-D arrays of equal length")
    if np.any(counts < 0):
        raise DomainError("counts must be non-negative")
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > PROB_SUM_TOL:
        raise DomainError(f"probabilities must be non-negative and sum to 1 (sum = {probs.sum()!r})")
    n = counts.sum()
    if n < 1:
        raise DomainError("need at least one observation")
    return counts, probs, n


def root_chi2(counts, probs) -> float:
    """Root chi-square statistic 4 [n - (sum_i sqrt(n_i p_i))^2].

    Asymptotically chi-square with s - 1 degrees of freedom under the null.
    """
    counts, probs, n = _counts_probs(counts, probs)
    overlap = np.sum(np.sqrt(counts * probs))
    return max(4.0 * (n - overlap * overlap), 0.0)


def pearson_chi2(counts, probs) -> float:
    """Classical Pearson statistic sum (n_i - n p_i)^2 / (n p_i)."""
    counts, probs, n = _counts_probs(counts, probs)
    expected = n * probs
    if np.any((expected == 0) & (counts > 0)):
        return float("inf")
    mask = expected > 0
    return float(np.sum((counts[mask] - expected[mask]) ** 2 / expected[mask]))


def root_normal_stat(n1, n2, p1):
    """Root normal statistic 2 (sqrt(n1 p2) - sqrt(n2 p1)), p2 = 1 - p1."""
    if not 0 < p1 < 1:
        raise DomainError("p1 must lie in (0, 1)")
    return 2.0 * (np.sqrt(np.asarray(n1, dtype=float) * (1 - p1)) - np.sqrt(np.asarray(n2, dtype=float) * p1))


def ml_stat(n1, n, p1):
    """Moivre-Laplace statistic (n1 - n p1) / sqrt(n p1 p2)."""
    if not 0 < p1 < 1:
        raise DomainError("p1 must lie in (0, 1)")
    return (np.asarray(n1, dtype=float) - n * p1) / np.sqrt(n * p1 * (1 - p1))


@dataclass(frozen=True)
class BinomialApproxReport:
    """Mean absolute pmf errors of the two normal approximations to Binomial(n, p1).

    ``mae_root``/``mae_ml``/``ratio`` use the primary cell metric: the normal
    probability of the cell [k - 1/2, k + 1/2] mapped through each statistic
    (outermost cells extend to infinity). ``diagnostics`` holds the same
    comparison for the point-density times Jacobian metric and for the
    absolute CDF error.
    """

    n: int
    p1: float
    mae_root: float
    mae_ml: float
    ratio: float
    diagnostics: dict

    def __iter__(self):
        return iter((self.mae_root, self.mae_ml, self.ratio))


def _normal_pdf(z):
    return np.exp(-0.5 * z * z) / np.sqrt(2 * np.pi)


def binomial_approx_report(n: int, p1: float) -> BinomialApproxReport:
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer")
    if not 0 < p1 < 1:
        raise DomainError("p1 must lie in (0, 1)")
    n = int(n)
    p2 = 1.0 - p1
    k = np.arange(n + 1, dtype=float)
    pmf = np.exp(special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)
                 + k * np.log(p1) + (n - k) * np.log(p2))
    support = pmf > PMF_FLOOR

    def z_root(x):
        x = np.clip(x, 0, n)
        return root_normal_stat(x, n - x, p1)

    def z_ml(x):
        return ml_stat(x, n, p1)

    def cell(z):
        lo = np.where(k == 0, -np.inf, z(k - 0.5))
        hi = np.where(k == n, np.inf, z(k + 0.5))
        return special.ndtr(hi) - special.ndtr(lo)

    def point(z, dz):
        with np.errstate(invalid="ignore"):
            return _normal_pdf(z(k)) * np.abs(dz)

    with np.errstate(divide="ignore", invalid="ignore"):
        dz_root = np.sqrt(p2) / np.sqrt(k) + np.sqrt(p1) / np.sqrt(n - k)
    dz_ml = np.full_like(k, 1.0 / np.sqrt(n * p1 * p2))

    def mae(approx):
        err = np.abs(approx - pmf)[support]
        err = err[np.isfinite(err)]
        return float(np.mean(err)) if err.size else float("nan")

    mae_root, mae_ml = mae(cell(z_root)), mae(cell(z_ml))
    cdf = np.cumsum(pmf)
    diag = {}
    pr, pm = mae(point(z_root, dz_root)), mae(point(z_ml, dz_ml))
    diag["point_jacobian"] = {"mae_root": pr, "mae_ml": pm, "ratio": pm / pr,
                              "nonfinite_points": int(np.sum(~np.isfinite(point(z_root, dz_root))[support]))}
    cr = float(np.mean(np.abs(special.ndtr(z_root(k + 0.5)) - cdf)[support]))
    cm = float(np.mean(np.abs(special.ndtr(z_ml(k + 0.5)) - cdf)[support]))
    diag["cdf"] = {"mae_root": cr, "mae_ml": cm, "ratio": cm / cr}
    return BinomialApproxReport(n, float(p1), mae_root, mae_ml, mae_ml / mae_root, diag)


# ---------------------------------------------------------------- confidence cone

@dataclass(frozen=True)
class ConfidenceCone:
    """Cone of half-angle ``half_angle`` around ``axis`` at confidence ``level``."""

    axis: StateVector
    half_angle: float
    level: float

    def __post_init__(self):
        if not 0 <= self.half_angle <= np.pi / 2:
            raise DomainError("half angle must lie in [0, pi/2]")

    def angle_to(self, state) -> float:
        """Angle between the cone axis and ``state`` (phase-insensitive)."""
        return float(np.arcsin(np.sqrt(max(1.0 - fidelity(self.axis, state), 0.0))))

    def contains(self, state) -> bool:
        return self.angle_to(state) <= self.half_angle


def cone_statistic(estimate, truth, n_total) -> float:
    """4 n sin^2(theta) with cos^2(theta) = |<truth, estimate>|^2."""
    return 4.0 * n_total * max(1.0 - fidelity(estimate, truth), 0.0)


def confidence_cone(estimate, n_total, alpha: float = 0.05) -> ConfidenceCone:
    """Cone sin^2(theta) <= chi2_{s-1, alpha} / (4 n) around a normalized estimate."""
    alpha = _check_alpha(alpha)
    c = _coeffs(estimate)
    if abs(np.vdot(c, c).real - 1) > 1e-10:
        raise DomainError("confidence cone needs a normalized estimate")
    if not n_total > 0:
        raise DomainError("n_total must be positive")
    axis = estimate if isinstance(estimate, StateVector) else StateVector(c)
    if c.size == 1:
        return ConfidenceCone(axis, 0.0, 1 - alpha)
    ratio = chi2_quantile(alpha, c.size - 1) / (4.0 * n_total)
    if ratio >= 1:
        warnings.warn("sample too small for a proper cone; half angle capped at pi/2", stacklevel=2)
        return ConfidenceCone(axis, np.pi / 2, 1 - alpha)
    return ConfidenceCone(axis, float(np.arcsin(np.sqrt(ratio))), 1 - alpha)


# ---------------------------------------------------------------- informational fidelity

@dataclass(frozen=True)
class FidelityReport:
    F_H: float
    loss: float
    n_total: float
    dof: int
    info_norm: float
    identity_gap: float | None = None

    @property
    def statistic(self) -> float:
        """4 n (1 - F_H), asymptotically chi-square with 2s - 1 degrees of freedom."""
        return 4.0 * self.n_total * self.loss

    def as_dict(self) -> dict:
        return {"F_H": self.F_H, "loss": self.loss, "n_total": self.n_total, "dof": self.dof,
                "info_norm": self.info_norm, "identity_gap": self.identity_gap}


def _as_xi(v) -> np.ndarray:
    if isinstance(v, StateVector) or np.iscomplexobj(v):
        return np.asarray(double(v).xi)
    return np.asarray(getattr(v, "xi", v), dtype=float).reshape(-1)


def informational_fidelity(H, xi_true, xi_hat, n_total=None, resolve_conjugation: bool = False
                           ) -> FidelityReport:
    """F_H = 1 - <dxi|H|dxi> / <xi|H|xi> with dxi = xi_true - xi_hat.

    ``xi_true``/``xi_hat`` may be doubled real vectors or complex states. The
    truth is first rotated to the global phase of the estimate and the
    remaining gauge component of dxi (along doubled i*c_hat) is projected
    out. ``resolve_conjugation`` also tries the complex-conjugate truth and
    keeps the smaller loss; use it for protocols with a real instrumental
    matrix, whose likelihood cannot tell c from conj(c).

    ``n_total`` (total counts) defaults to <xi|H|xi>/2; when given,
    ``identity_gap`` reports the relative deviation of <xi|H|xi> from 2 n.
    """
    H = np.asarray(H, dtype=float)
    xt, xh = _as_xi(xi_true), _as_xi(xi_hat)
    if H.shape != (xh.size, xh.size) or xt.size != xh.size or xh.size % 2:
        raise DomainError(f"dimension mismatch: H {H.shape}, xi {xt.size} and {xh.size}")
    s = xh.size // 2
    c_hat = xh[:s] + 1j * xh[s:]
    info_norm = float(xh @ H @ xh)
    if not info_norm > 0:
        raise DomainError(f"<xi|H|xi> = {info_norm!r}; information norm is degenerate")
    gauge = np.concatenate([-c_hat.imag, c_hat.real])
    gauge /= np.linalg.norm(gauge)

    def quad(c_true):
        d = np.asarray(double(align_phase(c_true, c_hat)).xi) - xh
        d -= gauge * (gauge @ d)
        return float(d @ H @ d)

    c_true = xt[:s] + 1j * xt[s:]
    q = quad(c_true)
    if resolve_conjugation:
        q = min(q, quad(c_true.conj()))
    loss = q / info_norm
    gap = None
    if n_total is None:
        n_total = info_norm / 2.0
    else:
        gap = abs(info_norm - 2.0 * n_total) / (2.0 * n_total)
    return FidelityReport(1.0 - loss, loss, float(n_total), 2 * s - 1, info_norm, gap)


def mean_information_loss(s: int, n):
    """Expected informational loss (2s - 1) / (4n); exact for integer arguments."""
    if int(s) != s or s < 1:
        raise DomainError("s must be a positive integer")
    if not n >= 1:
        raise DomainError("n must be at least 1")
    if float(n).is_integer():
        return float(Fraction(2 * int(s) - 1, 4 * int(n)))
    return (2 * s - 1) / (4.0 * n)
