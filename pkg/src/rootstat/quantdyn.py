"""Root-expansion dynamics in a one-dimensional potential.

A root expansion psi = sum_j c_j(t) phi_j(x) can only reproduce the averaged
Newtonian motion m d^2<x>/dt^2 = -<dU/dx> for every initial condition if the
basis diagonalizes the Hamiltonian H = -(hbar^2/2m) d^2/dx^2 + U(x); the
coefficients then rotate as c_j(t) = c_j(0) exp(-i omega_j t). In matrix form
the requirement reads

    m (omega_j - omega_k)^2 <k|x|j> = <k|dU/dx|j>        for all j, k,

which :func:`heisenberg_residual` measures for a given basis.

The Hamiltonian is discretized on a uniform grid, with the wave function
taken to vanish outside it. The default ``"sinc"`` scheme uses the
sinc-function (Colbert-Miller) kinetic matrix, which converges exponentially
for smooth potentials; ``"fd2"`` is the three-point second-order stencil.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh, eigh_tridiagonal

from .basisfn import HermiteBasis
from .errors import BoundaryLeakError, BoundaryLeakWarning, DomainError

LEAK_WARN = 1e-8
LEAK_FAIL = 1e-3
SCHEMES = ("sinc", "fd2")


@dataclass(frozen=True)
class Potential1D:
    """Potential energy U(x) with optional analytic force term dU/dx.

    Without ``dU`` the derivative is taken by central differences with the
    step supplied by the caller (the grid spacing inside this module).
    """

    U: Callable
    dU: Callable | None = None
    mass: float = 1.0
    hbar: float = 1.0
    name: str = "custom"

    def __post_init__(self):
        if not (self.mass > 0 and np.isfinite(self.mass)):
            raise DomainError(f"mass must be positive, got {self.mass!r}")
        if not (self.hbar > 0 and np.isfinite(self.hbar)):
            raise DomainError(f"hbar must be positive, got {self.hbar!r}")

    def __call__(self, x):
        return np.asarray(self.U(np.asarray(x, dtype=float)), dtype=float)

    def force_term(self, x, h: float = 1e-5):
        """dU/dx at ``x`` (analytic if available, else central difference with step ``h``)."""
        x = np.asarray(x, dtype=float)
        if self.dU is not None:
            return np.asarray(self.dU(x), dtype=float)
        return (self(x + h) - self(x - h)) / (2 * h)


def harmonic(omega: float = 1.0, mass: float = 1.0, hbar: float = 1.0) -> Potential1D:
    """U = m omega^2 x^2 / 2."""
    k = mass * omega ** 2
    return Potential1D(lambda x: 0.5 * k * x * x, lambda x: k * x, mass, hbar, "harmonic")


def quartic(coeff: float = 1.0, mass: float = 1.0, hbar: float = 1.0) -> Potential1D:
    """U = coeff x^4."""
    return Potential1D(lambda x: coeff * x ** 4, lambda x: 4 * coeff * x ** 3, mass, hbar, "quartic")


def table(xs, us, mass: float = 1.0, hbar: float = 1.0) -> Potential1D:
    """Cubic-spline potential through tabulated values; the force uses the spline derivative.

    Evaluation outside the table range raises DomainError.
    """
    xs = np.asarray(xs, dtype=float)
    us = np.asarray(us, dtype=float)
    if xs.ndim != 1 or xs.shape != us.shape or xs.size < 4:
        raise DomainError("potential table needs matching 1-D x and U arrays with at least 4 points")
    if np.any(np.diff(xs) <= 0):
        raise DomainError("potential table x values must be strictly increasing")
    if not np.all(np.isfinite(us)):
        raise DomainError("potential table values must be finite")
    spline = CubicSpline(xs, us)
    dspline = spline.derivative()

    def inside(f):
        def g(x):
            x = np.asarray(x, dtype=float)
            if np.any(x < xs[0] - 1e-12) or np.any(x > xs[-1] + 1e-12):
                raise DomainError(f"x outside the tabulated range [{xs[0]}, {xs[-1]}]")
            return f(x)
        return g

    return Potential1D(inside(spline), inside(dspline), mass, hbar, "table")


@dataclass(frozen=True)
class Grid:
    """``n`` equally spaced points on [lo, hi]."""

    lo: float
    hi: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi) and self.hi > self.lo):
            raise DomainError(f"invalid grid interval [{self.lo}, {self.hi}]")
        if int(self.n) != self.n or self.n < 3:
            raise DomainError("grid needs at least 3 points")

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, int(self.n))

    @property
    def h(self) -> float:
        return (self.hi - self.lo) / (self.n - 1)


def _grid(grid) -> Grid:
    if isinstance(grid, Grid):
        return grid
    lo, hi, n = grid
    return Grid(float(lo), float(hi), int(n))


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Lowest ``s`` eigenpairs on a grid.

    ``vectors[:, j]`` samples the j-th eigenfunction, normalized so that
    ``h * sum |phi_j|^2 = 1``; ``frequencies`` are E_j / hbar.
    """

    x: np.ndarray
    h: float
    frequencies: np.ndarray
    vectors: np.ndarray
    potential: Potential1D
    scheme: str
    leak: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def s(self) -> int:
        return self.frequencies.size

    @property
    def energies(self) -> np.ndarray:
        return self.potential.hbar * self.frequencies

    def gram(self) -> np.ndarray:
        return self.h * self.vectors.T @ self.vectors


def hamiltonian_matrix(potential: Potential1D, grid, scheme: str = "sinc"):
    """Dense (``sinc``) or tridiagonal (``fd2``: ``(diag, offdiag)``) Hamiltonian on ``grid``."""
    g = _grid(grid)
    if scheme not in SCHEMES:
        raise DomainError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")
    x, h = g.x, g.h
    U = potential(x)
    if not np.all(np.isfinite(U)):
        raise DomainError("potential is not finite on the grid")
    kin = potential.hbar ** 2 / (2 * potential.mass * h * h)
    if scheme == "fd2":
        return U + 2 * kin, np.full(x.size - 1, -kin)
    d = np.subtract.outer(np.arange(x.size), np.arange(x.size)).astype(float)
    with np.errstate(divide="ignore"):
        T = np.where(d == 0, np.pi ** 2 / 3, 2.0 / (d * d))
    T *= kin * np.where(d % 2 == 0, 1.0, -1.0)
    T[np.diag_indices_from(T)] += U
    return T


def _leak(vectors) -> float:
    edge = np.maximum(np.abs(vectors[0]), np.abs(vectors[-1]))
    return float(np.max(edge / np.max(np.abs(vectors), axis=0)))


def _check_leak(leak: float, strict: bool):
    if leak > LEAK_FAIL or (strict and leak > LEAK_WARN):
        raise BoundaryLeakError(
            f"eigenfunctions reach the grid boundary (relative edge amplitude {leak:.2e}); widen the grid")
    if leak > LEAK_WARN:
        warnings.warn(f"relative edge amplitude {leak:.2e} exceeds {LEAK_WARN:g}; results may feel the boundary",
                      BoundaryLeakWarning, stacklevel=3)


def solve_eigensystem(potential: Potential1D, grid, s: int, scheme: str = "sinc",
                      strict: bool = False) -> EigenSystem:
    """Lowest ``s`` eigenpairs of H = -(hbar^2/2m) d^2/dx^2 + U on ``grid`` (a Grid or (lo, hi, n)).

    Eigenfunctions are sign-fixed so the outermost sizeable lobe on the right
    is positive (the Hermite-function convention). Raises BoundaryLeakError
    if the highest one still has a relative amplitude above 1e-3 at the grid
    edge (or above 1e-8 when ``strict``), and warns above 1e-8.
    """
    g = _grid(grid)
    if int(s) != s or not 1 <= s <= g.n:
        raise DomainError(f"s must be an integer in [1, {g.n}]")
    H = hamiltonian_matrix(potential, g, scheme)
    if scheme == "fd2":
        E, V = eigh_tridiagonal(*H, select="i", select_range=(0, s - 1))
    else:
        E, V = eigh(H, subset_by_index=[0, s - 1])
    V = V / np.sqrt(g.h)
    # deterministic sign: the last point where |phi| reaches 1% of its maximum is positive
    big = np.abs(V) > 0.01 * np.max(np.abs(V), axis=0)
    last = V.shape[0] - 1 - np.argmax(big[::-1], axis=0)
    V = V * np.sign(V[last, np.arange(V.shape[1])])
    leak = _leak(V)
    _check_leak(leak, strict)
    return EigenSystem(g.x, g.h, E / potential.hbar, V, potential, scheme, leak)


def basis_eigensystem(potential: Potential1D, grid, basis: HermiteBasis, s: int | None = None,
                      scheme: str = "sinc") -> EigenSystem:
    """Treat a Hermite basis as if it were the eigenbasis of ``potential``.

    Frequencies are the diagonal Rayleigh quotients <phi_j|H|phi_j>/hbar.
    Useful as a negative control for :func:`heisenberg_residual`: unless the
    basis really diagonalizes H the residual stays of order one.
    """
    g = _grid(grid)
    s = basis.size if s is None else s
    V = basis.values(g.x, s).T
    H = hamiltonian_matrix(potential, g, scheme)
    if scheme == "fd2":
        diag, off = H
        HV = diag[:, None] * V
        HV[:-1] += off[:, None] * V[1:]
        HV[1:] += off[:, None] * V[:-1]
    else:
        HV = H @ V
    norms = np.sum(V * V, axis=0)
    freqs = np.sum(V * HV, axis=0) / norms / potential.hbar
    return EigenSystem(g.x, g.h, freqs, V, potential, "basis:" + scheme, _leak(V), {"basis": basis})


def matrix_elements(eig: EigenSystem, f) -> np.ndarray:
    """Matrix <k|f|j> = h sum_x phi_k(x)* f(x) phi_j(x); ``f`` is a callable or grid values."""
    fx = f(eig.x) if callable(f) else np.asarray(f)
    fx = np.broadcast_to(fx, eig.x.shape)
    if not np.all(np.isfinite(fx)):
        raise DomainError("f is not finite on the grid")
    V = eig.vectors
    return (eig.h * (V.conj().T * fx) @ V).astype(complex)


def position_matrix(eig: EigenSystem) -> np.ndarray:
    return matrix_elements(eig, eig.x)


def force_matrix(eig: EigenSystem) -> np.ndarray:
    """<k|dU/dx|j>, with a grid-spacing central difference when dU is not analytic."""
    return matrix_elements(eig, eig.potential.force_term(eig.x, eig.h))


def heisenberg_residual(eig: EigenSystem, potential: Potential1D | None = None, eps_abs: float | None = None,
                        return_matrix: bool = False):
    """max_{j,k} |m (w_j - w_k)^2 x_kj - F_kj| / (|F_kj| + eps_abs), F = <k|dU/dx|j>.

    ``eps_abs`` keeps selection-rule zeros from dominating the ratio; it
    defaults to 1e-3 * max |F|.
    """
    potential = eig.potential if potential is None else potential
    X = position_matrix(eig)
    F = matrix_elements(eig, potential.force_term(eig.x, eig.h))
    w = eig.frequencies
    lhs = potential.mass * np.subtract.outer(w, w) ** 2 * X
    scale = np.max(np.abs(F))
    if eps_abs is None:
        eps_abs = 1e-3 * scale if scale > 0 else 1e-12
    R = np.abs(lhs - F) / (np.abs(F) + eps_abs)
    return (float(R.max()), R) if return_matrix else float(R.max())


def degenerate_pairs(eig: EigenSystem, tol: float = 1e-8) -> list[tuple[int, int]]:
    """Index pairs j < k with |w_j - w_k| <= tol * max|w| (per-element check under-determined there)."""
    w = eig.frequencies
    scale = max(np.max(np.abs(w)), 1.0)
    return [(j, k) for j in range(w.size) for k in range(j + 1, w.size) if abs(w[j] - w[k]) <= tol * scale]


# ---------------------------------------------------------------- mixed states

@dataclass(frozen=True, eq=False)
class MixedRootDensity:
    """Mixture of root expansions c^(l), all rotating with the shared frequencies.

    ``components`` has shape (L, s); the values refer to time ``t0``.
    """

    components: np.ndarray
    frequencies: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        c = np.atleast_2d(np.array(self.components, dtype=complex))
        w = np.array(self.frequencies, dtype=float).reshape(-1)
        if c.ndim != 2 or c.shape[1] != w.size:
            raise DomainError(f"components {c.shape} do not match {w.size} frequencies")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(w))):
            raise DomainError("components and frequencies must be finite")
        c.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "components", c)
        object.__setattr__(self, "frequencies", w)

    @property
    def s(self) -> int:
        return self.frequencies.size

    @property
    def trace(self) -> float:
        return float(np.sum(np.abs(self.components) ** 2))

    def normalize(self) -> "MixedRootDensity":
        tr = self.trace
        if tr == 0:
            raise DomainError("cannot normalize an empty density")
        return MixedRootDensity(self.components / np.sqrt(tr), self.frequencies, self.t0)


def evolve_mixed(density: MixedRootDensity, t: float) -> MixedRootDensity:
    """Components at time ``t``: c_j(t) = c_j(t0) exp(-i w_j (t - t0))."""
    phase = np.exp(-1j * density.frequencies * (t - density.t0))
    return MixedRootDensity(density.components * phase, density.frequencies, t)


def density_matrix_t(density: MixedRootDensity, t: float) -> np.ndarray:
    """rho_jk(t) = sum_l c_j^(l)(t) conj(c_k^(l)(t))."""
    c = evolve_mixed(density, t).components
    return c.T @ c.conj()


def liouville_residual(density: MixedRootDensity, t: float, dt: float = 1e-4) -> float:
    """max |central-difference d(rho)/dt + i [diag(w), rho]| at time ``t``."""
    if not dt > 0:
        raise DomainError("dt must be positive")
    drho = (density_matrix_t(density, t + dt) - density_matrix_t(density, t - dt)) / (2 * dt)
    rho = density_matrix_t(density, t)
    w = density.frequencies
    comm = w[:, None] * rho - rho * w[None, :]
    return float(np.max(np.abs(drho + 1j * comm)))


def expectation_series(density: MixedRootDensity, op: np.ndarray, t_grid) -> np.ndarray:
    """Re tr(rho(t) op) over ``t_grid``."""
    return np.array([np.real(np.sum(density_matrix_t(density, t) * op.T)) for t in np.asarray(t_grid)])


def ehrenfest_check(density: MixedRootDensity, eig: EigenSystem, potential: Potential1D | None = None,
                    t_grid=None) -> float:
    """max over interior times of |d^2<x>/dt^2 + <dU/dx>/m|.

    The second derivative is the central difference on the uniform ``t_grid``
    (at least three points).
    """
    potential = eig.potential if potential is None else potential
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 3:
        raise DomainError("t_grid needs at least three points")
    dt = np.diff(t)
    if np.any(dt <= 0) or np.ptp(dt) > 1e-9 * dt.mean():
        raise DomainError("t_grid must be uniform and increasing")
    if density.s != eig.s:
        raise DomainError(f"density has {density.s} components, eigensystem {eig.s}")
    x = expectation_series(density, position_matrix(eig), t)
    f = expectation_series(density, matrix_elements(eig, potential.force_term(eig.x, eig.h)), t)
    acc = (x[2:] - 2 * x[1:-1] + x[:-2]) / dt.mean() ** 2
    return float(np.max(np.abs(acc + f[1:-1] / potential.mass)))
