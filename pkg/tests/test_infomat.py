import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rootstat.basisfn import HermiteBasis, dft_unitary
from rootstat.datagen import simulate_poisson
from rootstat.errors import DegenerateParameterizationError, DomainError, IncompleteProtocolError, SingularLikelihoodError
from rootstat.infomat import (MeasurementProtocol, chart_jacobian, complete_info, completeness_check,
                              covariance_full, empirical_fisher, fisher_analytic, fisher_quadrature,
                              gauge_direction, hermitian_fisher, info_matrices, intensity,
                              principal_fluctuations, symmetric_fisher)
from rootstat.mlsolve import poisson_loglik, solve_poisson
from rootstat.statevec import double

QUBIT_X = np.vstack([np.eye(2), dft_unitary(2)])


def real_state(s, rng):
    c = rng.normal(size=s)
    c /= np.linalg.norm(c)
    return c if c[0] > 0 else -c


def test_fisher_examples():
    np.testing.assert_allclose(fisher_analytic([1.0, 0.0], 10), [[40.0]])
    np.testing.assert_allclose(fisher_analytic([0.8, 0.6], 1), [[6.25]])
    np.testing.assert_allclose(fisher_analytic([0.8, 0.6, 0.0], 1), [[6.25, 0], [0, 4]], atol=1e-14)


@pytest.mark.parametrize("c", [[0.8, 0.6], [0.8, 0.6, 0.0], [1.0, 0.0]])
def test_fisher_examples_against_quadrature(c):
    np.testing.assert_allclose(fisher_quadrature(c, HermiteBasis(6), 1), fisher_analytic(c, 1), rtol=1e-6, atol=1e-12)


@pytest.mark.parametrize("c", [[0.0, 1.0], [-0.6, 0.8]])
def test_fisher_degenerate_chart(c):
    with pytest.raises(DegenerateParameterizationError):
        fisher_analytic(c, 1)
    with pytest.raises(DomainError):
        fisher_quadrature(c, HermiteBasis(3), 1)


@pytest.mark.parametrize("s", [2, 3, 5])
def test_fisher_basis_independence(s):
    rng = np.random.default_rng(s)
    for _ in range(20):
        c = real_state(s, rng)
        exact = fisher_analytic(c, 7.0)
        for size in (s, s + 9):
            np.testing.assert_allclose(fisher_quadrature(c, HermiteBasis(size, 1.7), 7.0), exact, rtol=1e-6)


def test_covariance_examples():
    cov = covariance_full([0.8, 0.6], 100)
    np.testing.assert_allclose(cov, [[0.0009, -0.0012], [-0.0012, 0.0016]], atol=1e-15)
    np.testing.assert_allclose(np.linalg.eigvalsh(cov), [0, 0.0025], atol=1e-15)
    np.testing.assert_allclose(cov @ [0.8, 0.6], [0, 0], atol=1e-16)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 7), st.integers(0, 10 ** 6))
def test_covariance_is_inverse_fisher_on_tangent_space(s, seed):
    c = real_state(s, np.random.default_rng(seed))
    n = 250.0
    A = chart_jacobian(c)
    pushed = A @ np.linalg.inv(fisher_analytic(c, n)) @ A.T
    np.testing.assert_allclose(pushed, covariance_full(c, n), atol=1e-8 / n)
    ev = np.linalg.eigvalsh(covariance_full(c, n))
    np.testing.assert_allclose(ev, [0] + [1 / (4 * n)] * (s - 1), atol=1e-12)


def test_intensity_examples():
    np.testing.assert_allclose(intensity(np.eye(2), [3, 4j]), [9, 16])
    np.testing.assert_allclose(intensity(np.eye(2), [0, 0]), [0, 0])
    np.testing.assert_allclose(intensity(QUBIT_X, [1, 0]), [1, 0, 0.5, 0.5], atol=1e-15)
    with pytest.raises(DomainError):
        intensity(np.eye(3), [1, 0])


def test_protocol_validation():
    with pytest.raises(DomainError):
        MeasurementProtocol(np.eye(2), [1.0])
    with pytest.raises(DomainError):
        MeasurementProtocol(np.eye(2), [1.0, 0.0])
    with pytest.raises(DomainError):
        MeasurementProtocol(np.eye(2), [1.0, 1.0], [1, -1])


def test_hermitian_fisher_examples():
    np.testing.assert_allclose(hermitian_fisher(MeasurementProtocol([[1.0]], [2.0])), [[2.0]])
    np.testing.assert_allclose(hermitian_fisher(MeasurementProtocol(np.eye(2), [1, 1])), np.eye(2))
    np.testing.assert_allclose(hermitian_fisher(MeasurementProtocol(QUBIT_X, np.ones(4))), 2 * np.eye(2), atol=1e-15)


def test_empirical_fisher_examples():
    np.testing.assert_allclose(empirical_fisher(MeasurementProtocol([[1.0]], [1.0], [100]), [50.0]), [[2.0]])
    np.testing.assert_allclose(empirical_fisher(MeasurementProtocol([[1.0]], [1.0], [0]), [0.0]), [[0.0]])
    rng = np.random.default_rng(0)
    X = rng.normal(size=(6, 3)) + 1j * rng.normal(size=(6, 3))
    t = rng.uniform(0.5, 2, 6)
    lam = rng.uniform(1, 3, 6)
    p = MeasurementProtocol(X, t, lam * t)
    np.testing.assert_allclose(empirical_fisher(p, lam), hermitian_fisher(p), atol=1e-12)
    with pytest.raises(SingularLikelihoodError):
        empirical_fisher(MeasurementProtocol([[1.0]], [1.0], [3]), [0.0])


def test_symmetric_fisher_examples():
    np.testing.assert_allclose(symmetric_fisher(MeasurementProtocol([[1.0]], [1.0], [100]), [10.0]), [[1.0]])
    rng = np.random.default_rng(1)
    Xr = rng.normal(size=(5, 3))
    K = symmetric_fisher(MeasurementProtocol(Xr, np.ones(5), np.arange(5)), rng.normal(size=5) + 2)
    assert np.all(K.imag == 0)
    X = rng.normal(size=(9, 3)) + 1j * rng.normal(size=(9, 3))
    M = rng.normal(size=9) + 1j * rng.normal(size=9)
    K = symmetric_fisher(MeasurementProtocol(X, np.ones(9), rng.integers(0, 50, 9)), M)
    np.testing.assert_allclose(K, K.T, atol=1e-12)
    assert not np.allclose(K, K.conj().T)
    with pytest.raises(SingularLikelihoodError):
        symmetric_fisher(MeasurementProtocol([[1.0]], [1.0], [3]), [0.0])


def test_complete_info_examples():
    t = 3.0
    np.testing.assert_allclose(complete_info([[t]], [[t]]), [[2 * t, 0], [0, 0]])
    np.testing.assert_allclose(complete_info(np.eye(3), np.zeros((3, 3))), np.eye(6))
    with pytest.raises(DomainError):
        complete_info(np.eye(2), np.zeros((3, 3)))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(0, 10 ** 6))
def test_complete_info_symmetric(s, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(s, s)) + 1j * rng.normal(size=(s, s))
    B = rng.normal(size=(s, s)) + 1j * rng.normal(size=(s, s))
    H = complete_info(A @ A.conj().T, B + B.T)
    np.testing.assert_allclose(H, H.T, atol=1e-12)


def test_quadratic_form_is_second_order_loglik():
    """-d ln L = <dxi|H|dxi> at the maximum, checked with a finite-difference Hessian."""
    p = simulate_poisson(QUBIT_X, np.sqrt(50) * np.array([1, 0.4 + 0.7j]), np.ones(4), seed=11)
    c, info, _ = solve_poisson(p)
    xi = double(c).xi
    h = 1e-4
    n = xi.size
    hess = np.empty((n, n))

    def L(v):
        return poisson_loglik(p, v[: n // 2] + 1j * v[n // 2:])

    for i in range(n):
        for j in range(n):
            ei, ej = np.eye(n)[i] * h, np.eye(n)[j] * h
            hess[i, j] = (L(xi + ei + ej) - L(xi + ei - ej) - L(xi - ei + ej) + L(xi - ei - ej)) / (4 * h * h)
    np.testing.assert_allclose(-0.5 * hess, info.H, atol=1e-4 * np.abs(info.H).max())


def test_stationary_point_identities():
    p = simulate_poisson(QUBIT_X, np.sqrt(200) * np.array([0.6, 0.8j]), np.ones(4), seed=3)
    c, info, _ = solve_poisson(p)
    c = c.coeffs
    Ic = info.I @ c
    np.testing.assert_allclose(info.J @ c, Ic, atol=1e-8 * np.linalg.norm(Ic))
    np.testing.assert_allclose(info.H @ double(1j * c).xi, 0, atol=1e-8 * np.abs(info.H).max())
    xi = double(c).xi
    assert xi @ info.H @ xi == pytest.approx(2 * p.total_counts, rel=1e-8)


def test_single_process_completeness():
    t = 5.0
    H = complete_info([[t]], [[t]])
    v = completeness_check(H, state=[2.0])
    assert v.complete and v.n_zero == 1
    np.testing.assert_allclose(np.abs(v.zero_mode), [0, 1])
    np.testing.assert_allclose(gauge_direction([2.0]), [0, 1])
    assert v.gauge_angle < 1e-12


def test_identity_only_protocol_is_incomplete():
    p = MeasurementProtocol(np.eye(2), [1, 1], [30, 70])
    c = np.sqrt([30, 70]).astype(complex)
    v = completeness_check(info_matrices(p, c).H, state=c)
    assert not v.complete and v.n_zero >= 2
    assert v.message.startswith("incomplete")


def test_identity_has_no_zero_mode():
    v = completeness_check(np.eye(4))
    assert not v.complete and v.n_zero == 0


def test_negative_eigenvalue_reports_not_a_maximum():
    v = completeness_check(np.diag([2.0, 0.0, -1.0]))
    assert not v.complete and v.message.startswith("not a likelihood maximum")


def test_qubit_protocol_complete_at_ml():
    p = simulate_poisson(QUBIT_X, np.sqrt(1000) * np.array([1, 1j]), np.ones(4), seed=0)
    c, info, _ = solve_poisson(p)
    v = completeness_check(info.H, state=c)
    assert v.complete and v.n_zero == 1 and v.gauge_angle < 1e-6
    assert len(principal_fluctuations(info.H)) == 3


def test_principal_fluctuations_examples():
    t = 2.0
    (var, direction), = [tuple(f) for f in principal_fluctuations(np.diag([2 * t, 0.0]))]
    assert var == pytest.approx(1 / (4 * t))
    np.testing.assert_allclose(np.abs(direction), [1, 0])
    H = np.diag([3.0, 0.0, 1.0, 1.0])
    v1 = [f.variance for f in principal_fluctuations(H)]
    v2 = [f.variance for f in principal_fluctuations(2 * H)]
    assert v1 == sorted(v1, reverse=True)
    np.testing.assert_allclose(v2, np.array(v1) / 2)
    np.testing.assert_allclose(v1, [0.5, 0.5, 1 / 6])
    with pytest.raises(IncompleteProtocolError):
        principal_fluctuations(np.diag([1.0, 0.0, 0.0]))
