import dataclasses
import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from infogeo import convexcore as cc
from infogeo.errors import DimensionError, DomainError

finite = st.floats(-5, 5, allow_nan=False)


def exp_potential():
    return cc.PotentialFunction(dim=1, domain=cc.Box.real(1), value=lambda t: float(np.exp(t[0])), name="exp")


# --- grad -------------------------------------------------------------------

def test_grad_quadratic():
    np.testing.assert_allclose(cc.grad(cc.quadratic_potential(2), [1.0, 2.0]), [1.0, 2.0], atol=1e-12)


def test_grad_exp_at_zero_numeric():
    np.testing.assert_allclose(cc.grad(exp_potential(), [0.0]), [1.0], atol=1e-9)


def test_grad_bernoulli_numeric_and_analytic():
    F = cc.bernoulli_potential()
    np.testing.assert_allclose(cc.grad(F, [0.0]), [0.5], atol=1e-12)
    np.testing.assert_allclose(cc.grad(F.without_closed_forms(), [0.0]), [0.5], atol=1e-9)


def test_grad_outside_domain():
    with pytest.raises(DomainError):
        cc.grad(cc.exponential_potential(), [0.5])


@pytest.mark.parametrize("make", [cc.bernoulli_potential, cc.poisson_potential, cc.gaussian_potential,
                                  cc.exponential_potential, lambda: cc.categorical_potential(4)])
def test_analytic_gradient_matches_fd(make, rng):
    F = make()
    for _ in range(20):
        t = _random_point(F, rng)
        fd = cc.fd_gradient(F.value, t, F.domain)
        np.testing.assert_allclose(cc.grad(F, t), fd, rtol=1e-5, atol=1e-8)


def _random_point(F, rng):
    if F.name.startswith("gaussian") and F.dim == 2:
        return np.array([rng.uniform(-2, 2), -rng.uniform(0.1, 2)])
    if F.name.startswith("exponential"):
        return np.array([-rng.uniform(0.2, 3)])
    return rng.uniform(-2, 2, F.dim)


# --- hessian / convexity ------------------------------------------------------

@pytest.mark.parametrize("make", [cc.bernoulli_potential, cc.poisson_potential, cc.gaussian_potential,
                                  cc.exponential_potential, lambda: cc.categorical_potential(3)])
def test_hessian_spd_and_convexity(make, rng):
    F = make()
    for _ in range(30):
        a, b = _random_point(F, rng), _random_point(F, rng)
        H = cc.hessian(F, a)
        np.testing.assert_allclose(H, H.T, atol=1e-12)
        assert np.linalg.eigvalsh(H).min() > 0
        t = rng.uniform()
        assert F.value(t * a + (1 - t) * b) <= t * F.value(a) + (1 - t) * F.value(b) + 1e-12


# --- conjugate ----------------------------------------------------------------

def test_legendre_quadratic():
    res = cc.legendre_conjugate(cc.quadratic_potential(2), [3.0, -1.0])
    assert res.value == pytest.approx(5.0, abs=1e-10)
    np.testing.assert_allclose(res.theta, [3.0, -1.0], atol=1e-10)


def _grid_sup(f, eta, lo=-30, hi=30, n=600001):
    grid = np.linspace(lo, hi, n)
    return np.max(grid * eta - f(grid))


def test_legendre_bernoulli_against_grid():
    res = cc.legendre_conjugate(cc.bernoulli_potential().without_closed_forms(), [0.5])
    oracle = _grid_sup(lambda t: np.log1p(np.exp(t)), 0.5)
    assert res.value == pytest.approx(oracle, abs=1e-8)
    assert res.value == pytest.approx(-0.693147, abs=1e-6)
    assert res.theta[0] == pytest.approx(0.0, abs=1e-8)


def test_legendre_poisson_against_grid():
    res = cc.legendre_conjugate(cc.poisson_potential().without_closed_forms(), [1.0])
    assert res.value == pytest.approx(_grid_sup(np.exp, 1.0, -10, 5), abs=1e-8)
    assert res.value == pytest.approx(-1.0, abs=1e-10)
    assert res.theta[0] == pytest.approx(0.0, abs=1e-9)


def test_legendre_residual_small():
    F = cc.categorical_potential(3).without_closed_forms()
    eta = np.array([0.2, 0.5])
    res = cc.legendre_conjugate(F, eta)
    assert np.max(np.abs(cc.grad(F, res.theta) - eta)) <= 1e-10


def test_legendre_out_of_range():
    with pytest.raises(DomainError):
        cc.legendre_conjugate(cc.bernoulli_potential(), [1.5])
    with pytest.raises(DomainError):
        cc.legendre_conjugate(cc.poisson_potential().without_closed_forms(), [-1.0])


@given(st.floats(-4, 4))
def test_round_trip_theta_eta(t):
    F = cc.bernoulli_potential().without_closed_forms()
    back = cc.eta_to_theta(F, cc.theta_to_eta(F, [t]))
    assert abs(back[0] - t) <= 1e-8


def test_biconjugation_bernoulli(rng):
    F = cc.bernoulli_potential()
    Fs = cc.conjugate(F.without_closed_forms())
    for t in rng.uniform(-3, 3, 20):
        back = cc.legendre_conjugate(Fs, [t])  # (F*)*(t)
        assert back.value == pytest.approx(F.value([t]), abs=1e-8)


# --- Crouzeix ---------------------------------------------------------------

def test_crouzeix_quadratic():
    assert cc.crouzeix_residual(cc.quadratic_potential(3), [0.3, -1.0, 2.0]) <= 1e-12


@pytest.mark.parametrize("F,theta", [(cc.bernoulli_potential(), 0.7), (cc.poisson_potential(), 1.3)])
def test_crouzeix_numeric(F, theta):
    assert cc.crouzeix_residual(F.without_closed_forms(), [theta]) <= 1e-5


# --- cubic tensor -----------------------------------------------------------

def test_cubic_quadratic_zero():
    assert np.max(np.abs(cc.cubic_tensor(cc.quadratic_potential(2), [1.0, -1.0]))) <= 1e-6


def test_cubic_exp():
    assert cc.cubic_tensor(exp_potential(), [0.0])[0, 0, 0] == pytest.approx(1.0, abs=1e-5)


def test_cubic_bernoulli_symmetry_point():
    assert abs(cc.cubic_tensor(cc.bernoulli_potential().without_closed_forms(), [0.0])[0, 0, 0]) <= 1e-6


def test_cubic_permutation_invariance(rng):
    F = cc.categorical_potential(4).without_closed_forms()
    C = cc.cubic_tensor(F, rng.uniform(-1, 1, 3))
    for perm in itertools.permutations(range(3)):
        np.testing.assert_allclose(C, np.transpose(C, perm), atol=1e-8)


@pytest.mark.parametrize("make,theta", [
    (lambda: cc.categorical_potential(3), [0.4, -0.8]),
    (cc.gaussian_potential, [0.7, -0.3]),
    (cc.exponential_potential, [-1.7]),
    (cc.bernoulli_potential, [0.9]),
    (lambda: cc.negative_entropy_potential(2), [0.3, 1.2]),
])
def test_cubic_analytic_matches_fd(make, theta):
    F = make()
    numeric = dataclasses.replace(F, third=None)
    np.testing.assert_allclose(cc.cubic_tensor(F, theta), cc.cubic_tensor(numeric, theta), rtol=1e-5, atol=1e-6)


# --- Mahalanobis --------------------------------------------------------------

@pytest.mark.parametrize("G,u,expected", [
    (np.eye(2), [3.0, 4.0], 5.0),
    (np.diag([4.0, 1.0]), [1.0, 0.0], 2.0),
    (np.array([[2.0, 1.0], [1.0, 2.0]]), [1.0, 1.0], np.sqrt(6.0)),
])
def test_mahalanobis_examples(G, u, expected):
    assert cc.mahalanobis(cc.QuadraticForm(G), u, [0.0, 0.0]) == pytest.approx(expected, abs=1e-12)


def test_mahalanobis_dimension():
    with pytest.raises(DimensionError):
        cc.mahalanobis(cc.QuadraticForm(np.eye(2)), [1.0, 2.0, 3.0], [0.0, 0.0])


def test_quadratic_form_rejects_indefinite():
    with pytest.raises(ValueError):
        cc.QuadraticForm(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_mahalanobis_triangle(rng):
    A = rng.normal(size=(3, 3))
    Q = cc.QuadraticForm(A @ A.T + 0.1 * np.eye(3))
    for _ in range(1000):
        u, v, w = rng.normal(size=(3, 3))
        assert cc.mahalanobis(Q, u, w) <= cc.mahalanobis(Q, u, v) + cc.mahalanobis(Q, v, w) + 1e-12


@given(st.lists(finite, min_size=2, max_size=2))
def test_mahalanobis_zero_iff_equal(u):
    Q = cc.QuadraticForm(np.diag([2.0, 3.0]))
    assert cc.mahalanobis(Q, u, u) == 0.0
    assert cc.mahalanobis(Q, u, np.add(u, [1e-3, 0])) > 0


# --- Newton engine -------------------------------------------------------------

def test_damped_newton_equality_constrained():
    # min sum x log x on the simplex face x1 + x2 + x3 = 1  -> uniform
    F = cc.negative_entropy_potential(3)
    A = np.ones((1, 3))
    res = cc.damped_newton(F.value, F.gradient, F.hessian, np.array([0.2, 0.3, 0.5]), F.domain, A=A)
    np.testing.assert_allclose(res.x, np.full(3, 1 / 3), atol=1e-10)
