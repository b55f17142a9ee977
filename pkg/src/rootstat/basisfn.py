"""Orthonormal basis families: Chebyshev-Hermite functions and register bases.

Hermite functions are evaluated with the normalized three-term recurrence

    phi_0(x) = pi^(-1/4) exp(-x^2/2)
    phi_{j+1}(x) = x sqrt(2/(j+1)) phi_j(x) - sqrt(j/(j+1)) phi_{j-1}(x)

which never forms factorials or raw Hermite polynomials, so it stays finite
for large indices. Samples are rescaled x -> x/scale before expansion; the
1/sqrt(scale) factor keeps the family orthonormal in the original units.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

PI_QUARTER = np.pi ** -0.25


def hermite_functions(n: int, x) -> np.ndarray:
    """Values of phi_0..phi_{n-1} at ``x`` (dimensionless), shape ``(n, *x.shape)``."""
    x = np.asarray(x, dtype=float)
    if n < 1:
        raise DomainError("need at least one basis function")
    if not np.all(np.isfinite(x)):
        raise DomainError("x must be finite")
    out = np.empty((n,) + x.shape)
    out[0] = PI_QUARTER * np.exp(-0.5 * x * x)
    if n > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for j in range(1, n - 1):
        out[j + 1] = x * np.sqrt(2.0 / (j + 1)) * out[j] - np.sqrt(j / (j + 1)) * out[j - 1]
    return out


def fourier_phases(n: int) -> np.ndarray:
    """Fourier eigenvalues (-i)^j of the Hermite functions, j = 0..n-1."""
    return (-1j) ** np.arange(n)


@dataclass(frozen=True)
class HermiteBasis:
    """Hermite functions phi_0..phi_{size-1} on the line, with length unit ``scale``."""

    size: int
    scale: float = 1.0

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 1:
            raise DomainError(f"basis size must be a positive integer, got {self.size!r}")
        if not (self.scale > 0 and np.isfinite(self.scale)):
            raise DomainError(f"scale must be positive, got {self.scale!r}")

    def values(self, x, n: int | None = None) -> np.ndarray:
        """Real matrix ``(n, len(x))`` of phi_j(x); ``n`` defaults to the basis size."""
        n = self.size if n is None else self._check_count(n)
        return hermite_functions(n, np.asarray(x, dtype=float) / self.scale) / np.sqrt(self.scale)

    def conjugate_values(self, p, n: int | None = None) -> np.ndarray:
        """Complex matrix ``(n, len(p))`` of the momentum-space functions (-i)^j phi_j.

        With length unit ``a`` the transform of phi_j(x/a)/sqrt(a) is
        (-i)^j sqrt(a) phi_j(a p).
        """
        n = self.size if n is None else self._check_count(n)
        p = np.asarray(p, dtype=float)
        vals = hermite_functions(n, p * self.scale) * np.sqrt(self.scale)
        return fourier_phases(n).reshape((n,) + (1,) * p.ndim) * vals

    def _check_count(self, n):
        if not 1 <= n <= self.size:
            raise DomainError(f"requested {n} functions from a basis of size {self.size}")
        return n

    def _check_index(self, j):
        if int(j) != j or not 0 <= j < self.size:
            raise DomainError(f"index {j!r} out of range for basis of size {self.size}")
        return int(j)


def eval_basis(basis: HermiteBasis, j: int, x):
    """phi_j(x) for the given basis (scalar in, scalar out)."""
    j = basis._check_index(j)
    vals = basis.values(x, j + 1)[j]
    return float(vals) if vals.ndim == 0 else vals


def eval_conjugate_basis(basis: HermiteBasis, j: int, p):
    """Momentum-space basis function (-i)^j phi_j(p)."""
    j = basis._check_index(j)
    vals = basis.conjugate_values(p, j + 1)[j]
    return complex(vals) if vals.ndim == 0 else vals


def dft_unitary(dim: int) -> np.ndarray:
    """Unitary DFT matrix U_jk = exp(2 pi i jk / dim) / sqrt(dim)."""
    if int(dim) != dim or dim < 1:
        raise DomainError(f"dim must be a positive integer, got {dim!r}")
    jk = np.outer(np.arange(dim), np.arange(dim))
    return np.exp(2j * np.pi * jk / dim) / np.sqrt(dim)


def is_unitary(U, atol: float = 1e-12) -> bool:
    U = np.asarray(U)
    return U.ndim == 2 and U.shape[0] == U.shape[1] and np.allclose(U.conj().T @ U, np.eye(len(U)), rtol=0, atol=atol)


@dataclass(frozen=True, eq=False)
class RegisterBasis:
    """Computational basis of a register plus the transform to the conjugate basis."""

    dim: int
    conjugate_transform: np.ndarray = field(default=None)

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError(f"dim must be a positive integer, got {self.dim!r}")
        U = self.conjugate_transform
        U = dft_unitary(self.dim) if U is None else np.asarray(U, dtype=complex)
        if U.shape != (self.dim, self.dim):
            raise DomainError(f"transform shape {U.shape} does not match dim {self.dim}")
        if not is_unitary(U):
            raise DomainError("conjugate transform is not unitary")
        object.__setattr__(self, "conjugate_transform", U)

    @classmethod
    def qubits(cls, q: int) -> "RegisterBasis":
        return cls(2 ** q)
