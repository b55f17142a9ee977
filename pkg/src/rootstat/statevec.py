"""State vectors, psi-function densities and related value objects."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basisfn import HermiteBasis
from .errors import DomainError

NORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class StateVector:
    """Expansion coefficients c_0..c_{s-1} of a psi-function.

    ``normalized=False`` is allowed for Poisson-process reconstructions, where
    the squared norm carries the total event intensity.
    """

    coeffs: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).reshape(-1)
        if c.size < 1:
            raise DomainError("state vector needs at least one component")
        if not np.all(np.isfinite(c)):
            raise DomainError("state vector has non-finite components")
        if self.normalized and abs(np.vdot(c, c).real - 1.0) > NORM_TOL:
            raise DomainError(f"state flagged normalized but |c|^2 = {np.vdot(c, c).real!r}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_array(cls, c, normalize: bool = True) -> "StateVector":
        c = np.asarray(c, dtype=complex).reshape(-1)
        if normalize:
            norm = np.linalg.norm(c)
            if norm == 0:
                raise DomainError("cannot normalize the zero vector")
            c = c / norm
        return cls(c, normalized=normalize)

    @property
    def s(self) -> int:
        return self.coeffs.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def normalize(self) -> "StateVector":
        return StateVector.from_array(self.coeffs)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coeffs, dtype=dtype)

    def __len__(self):
        return self.s

    def __repr__(self):
        return f"StateVector({np.array2string(self.coeffs, precision=6)}, normalized={self.normalized})"


@dataclass(frozen=True, eq=False)
class RealDoubled:
    """Real vector of length 2s: real parts followed by imaginary parts."""

    xi: np.ndarray

    def __post_init__(self):
        xi = np.array(self.xi, dtype=float).reshape(-1)
        if xi.size == 0 or xi.size % 2:
            raise DomainError(f"doubled vector must have positive even length, got {xi.size}")
        xi.setflags(write=False)
        object.__setattr__(self, "xi", xi)

    @property
    def s(self) -> int:
        return self.xi.size // 2

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.xi, dtype=dtype)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    rho: np.ndarray

    @property
    def s(self) -> int:
        return self.rho.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.rho, dtype=dtype)


def _coeffs(state) -> np.ndarray:
    if isinstance(state, StateVector):
        return state.coeffs
    return np.asarray(state, dtype=complex).reshape(-1)


def _check_fits(c, basis: HermiteBasis):
    if c.size > basis.size:
        raise DomainError(f"state has {c.size} components but basis only {basis.size}")


def psi_at(state, basis: HermiteBasis, x):
    c = _coeffs(state)
    _check_fits(c, basis)
    return c @ basis.values(x, c.size)


def psi_momentum_at(state, basis: HermiteBasis, p):
    c = _coeffs(state)
    _check_fits(c, basis)
    return c @ basis.conjugate_values(p, c.size)


def density_at(state, basis: HermiteBasis, x):
    """Coordinate density |sum_j c_j phi_j(x)|^2."""
    out = np.abs(psi_at(state, basis, x)) ** 2
    return float(out) if np.ndim(out) == 0 else out


def momentum_density_at(state, basis: HermiteBasis, p):
    """Momentum density |sum_j c_j (-i)^j phi_j(p)|^2."""
    out = np.abs(psi_momentum_at(state, basis, p)) ** 2
    return float(out) if np.ndim(out) == 0 else out


def gauge_fix(state):
    """Rotate the global phase so the largest-magnitude coefficient is real positive.

    Ties go to the lowest index. Returns the same kind of object it was given
    (StateVector in, StateVector out; arrays in, array out).
    """
    c = _coeffs(state)
    mags = np.abs(c)
    top = mags.max(initial=0.0)
    if top == 0:
        raise DomainError("cannot gauge-fix the zero vector")
    # near-ties are decided by index so round-off cannot flip the reference component
    ref = int(np.flatnonzero(mags >= top * (1 - 1e-12))[0])
    fixed = c * (np.conj(c[ref]) / mags[ref])
    fixed[ref] = mags[ref]
    if isinstance(state, StateVector):
        return StateVector(fixed, normalized=state.normalized)
    return fixed


def align_phase(c, reference) -> np.ndarray:
    """Rotate ``c`` by the global phase that brings it closest to ``reference``."""
    c = _coeffs(c)
    overlap = np.vdot(c, _coeffs(reference))
    if overlap == 0:
        return c.copy()
    return c * (overlap / abs(overlap))


def fidelity(a, b) -> float:
    """Squared overlap |<a, b>|^2 of two normalized states."""
    ca, cb = _coeffs(a), _coeffs(b)
    if ca.shape != cb.shape:
        raise DomainError(f"dimension mismatch: {ca.size} vs {cb.size}")
    return float(min(abs(np.vdot(ca, cb)) ** 2, 1.0))


def double(state) -> RealDoubled:
    c = _coeffs(state)
    return RealDoubled(np.concatenate([c.real, c.imag]))


def undouble(xi) -> StateVector:
    xi = xi.xi if isinstance(xi, RealDoubled) else RealDoubled(xi).xi
    s = xi.size // 2
    c = xi[:s] + 1j * xi[s:]
    return StateVector(c, normalized=abs(np.vdot(c, c).real - 1.0) <= NORM_TOL)


def density_matrix(state) -> DensityMatrix:
    """Pure-state density matrix rho_ij = c_i conj(c_j)."""
    c = _coeffs(state)
    return DensityMatrix(np.outer(c, c.conj()))
