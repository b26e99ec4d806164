import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import norm

from infogeo import convexcore as cc, divergences as dv
from infogeo.errors import DegenerateGeneratorError, DimensionError, PartitionError, RangeError, SupportError

P = [0.5, 0.5]
Q = [0.25, 0.75]
KL_PQ = 0.5 * np.log(0.5 / 0.25) + 0.5 * np.log(0.5 / 0.75)


def simplex_points(dim, min_size=None):
    return st.lists(st.floats(0.01, 1.0), min_size=dim, max_size=dim).map(lambda v: np.array(v) / np.sum(v))


# --- parameter divergences ------------------------------------------------------

def test_bregman_quadratic():
    assert dv.bregman(cc.quadratic_potential(2), [1.0, 2.0], [0.0, 0.0]) == pytest.approx(2.5)


def test_bregman_extended_kl():
    F = cc.negative_entropy_potential(2)
    assert dv.bregman(F, P, Q) == pytest.approx(KL_PQ, abs=1e-12)
    assert KL_PQ == pytest.approx(0.143841, abs=1e-6)


def test_bregman_self_zero():
    F = cc.gaussian_potential()
    assert dv.bregman(F, [0.3, -1.2], [0.3, -1.2]) == 0.0


@given(st.lists(st.floats(-5, 5), min_size=2, max_size=2), st.lists(st.floats(-5, 5), min_size=2, max_size=2))
def test_bregman_nonnegative_categorical(a, b):
    F = cc.categorical_potential(3)
    v = dv.bregman(F, a, b)
    assert v >= 0
    if np.allclose(a, b, atol=0, rtol=0):
        assert v == 0


def test_canonical_examples():
    F = cc.quadratic_potential(2)
    assert dv.canonical(F, [1.0, 0.0], [1.0, 0.0]) == pytest.approx(0.0, abs=1e-12)
    assert dv.canonical(F, [1.0, 0.0], [0.0, 1.0]) == pytest.approx(1.0, abs=1e-12)
    assert dv.canonical(cc.bernoulli_potential(), [0.0], [0.5]) == pytest.approx(0.0, abs=1e-12)


def test_canonical_equals_bregman(rng):
    F = cc.poisson_potential().without_closed_forms()
    for _ in range(20):
        t, e = rng.uniform(-2, 2), rng.uniform(0.2, 5)
        assert dv.canonical(F, [t], [e]) == pytest.approx(dv.bregman(F, [t], [np.log(e)]), abs=1e-8)


def test_dual_bregman_via_numeric_conjugate(rng):
    F = cc.bernoulli_potential()
    Fs = cc.conjugate(F.without_closed_forms())
    for _ in range(20):
        t1, t2 = rng.uniform(-3, 3, 2)
        e1, e2 = cc.grad(F, [t1]), cc.grad(F, [t2])
        assert dv.bregman(F, [t2], [t1]) == pytest.approx(dv.bregman(Fs, e1, e2), abs=1e-6)


def test_skew_jensen_quadratic():
    assert dv.skew_jensen(cc.quadratic_potential(2), 0.5, [2.0, 0.0], [0.0, 0.0]) == pytest.approx(0.5)


def test_skew_jensen_equal_points():
    assert dv.skew_jensen(cc.poisson_potential(), 0.3, [0.4], [0.4]) == pytest.approx(0.0, abs=1e-15)


def test_skew_jensen_small_alpha_limit():
    F = cc.poisson_potential()
    a = 1e-4
    lim = dv.skew_jensen(F, a, [1.0], [-0.5]) / a
    assert lim == pytest.approx(dv.bregman(F, [1.0], [-0.5]), rel=1e-3)


@pytest.mark.parametrize("a", [0.0, 1.0, -0.1, 1.5])
def test_skew_jensen_range(a):
    with pytest.raises(RangeError):
        dv.skew_jensen(cc.poisson_potential(), a, [0.0], [1.0])


# --- generators ----------------------------------------------------------------

ALL_GENERATORS = [g() for g in dv.BUILTIN_GENERATORS.values()] + [dv.alpha_generator(a) for a in (-0.5, 0.0, 0.5, 2.0)]


@pytest.mark.parametrize("gen", ALL_GENERATORS, ids=lambda g: g.name)
def test_generator_invariants(gen):
    assert abs(float(gen(1.0))) <= 1e-12
    u = np.linspace(0.01, 10, 400)
    a, b = u[:-1], u[1:]
    assert np.all(gen(0.5 * (a + b)) <= 0.5 * (gen(a) + gen(b)) + 1e-10)


@pytest.mark.parametrize("gen", [g for g in ALL_GENERATORS if g.name != "tv"], ids=lambda g: g.name)
def test_analytic_derivatives_match_fd(gen):
    d_fd = dv._fd_derivatives_at_one(gen.f)
    np.testing.assert_allclose([gen.fprime1, gen.fsecond1, gen.fthird1], d_fd, atol=2e-4)


def test_standardize_examples():
    g = dv.standardize(dv.reverse_kl_generator())
    u = np.linspace(0.1, 5, 50)
    np.testing.assert_allclose(g(u), u * np.log(u) - (u - 1), atol=1e-12)
    assert g.is_standard()
    g = dv.standardize(dv.chi2_generator())
    np.testing.assert_allclose(g(u), (u - 1) ** 2 / 2, atol=1e-12)
    g = dv.standardize(dv.kl_generator())
    np.testing.assert_allclose(g(u), -np.log(u) + (u - 1), atol=1e-12)


def test_standardize_scales_divergence(rng):
    for gen in (dv.hellinger_generator(), dv.js_generator(), dv.chi2_generator(), dv.kl_generator()):
        s = dv.standardize(gen)
        for _ in range(20):
            p, q = rng.dirichlet(np.ones(4), 2)
            a = dv.f_divergence_discrete(s, p, q)
            b = dv.f_divergence_discrete(gen, p, q) / gen.fsecond1
            assert a == pytest.approx(b, rel=1e-10, abs=1e-14)


def test_standardize_degenerate():
    with pytest.raises(DegenerateGeneratorError):
        dv.standardize(dv.FGenerator(lambda u: u - 1.0, "linear"))


def test_diamond_examples():
    u = np.linspace(0.1, 5, 50)
    np.testing.assert_allclose(dv.diamond(dv.kl_generator())(u), u * np.log(u), atol=1e-12)
    tv = dv.tv_generator()
    np.testing.assert_allclose(dv.diamond(tv)(u), tv(u), atol=1e-12)
    he = dv.hellinger_generator()
    np.testing.assert_allclose(dv.diamond(he)(u), he(u), atol=1e-12)


def test_diamond_preserves_standard():
    g = dv.diamond(dv.standardize(dv.kl_generator()))
    assert g.is_standard()


@pytest.mark.parametrize("gen", ALL_GENERATORS, ids=lambda g: g.name)
def test_reference_duality(gen, rng):
    gd = dv.diamond(gen)
    for _ in range(50):
        p, q = rng.dirichlet(np.ones(5), 2)
        assert dv.f_divergence_discrete(gd, p, q) == pytest.approx(dv.f_divergence_discrete(gen, q, p), abs=1e-12)


def test_alpha_of_generator():
    assert dv.alpha_of_generator(dv.standardize(dv.kl_generator())) == pytest.approx(-1.0, abs=1e-3)
    assert dv.alpha_of_generator(dv.standardize(dv.reverse_kl_generator())) == pytest.approx(1.0, abs=1e-3)
    assert dv.alpha_of_generator(dv.alpha_generator(0.0)) == pytest.approx(0.0, abs=1e-3)
    fd_only = dv.FGenerator(dv.alpha_generator(0.0).f, "alpha0-fd")
    assert dv.alpha_of_generator(fd_only) == pytest.approx(0.0, abs=1e-3)


@pytest.mark.parametrize("a", [-0.5, 0.0, 0.5, 2.0])
def test_alpha_generator_roundtrip(a):
    assert dv.alpha_of_generator(dv.alpha_generator(a)) == pytest.approx(a, abs=1e-9)


def test_alpha_generator_limits():
    u = np.linspace(0.2, 4, 20)
    np.testing.assert_allclose(dv.alpha_generator(-1)(u), dv.standardize(dv.kl_generator())(u), atol=1e-12)
    np.testing.assert_allclose(dv.alpha_generator(1)(u), dv.standardize(dv.reverse_kl_generator())(u), atol=1e-12)
    np.testing.assert_allclose(dv.alpha_generator(-1 + 1e-6)(u), dv.alpha_generator(-1)(u), atol=1e-5)


# --- discrete f-divergences --------------------------------------------------

def test_f_divergence_examples():
    assert dv.f_divergence_discrete(dv.kl_generator(), P, Q) == pytest.approx(0.143841, abs=1e-6)
    assert dv.f_divergence_discrete(dv.tv_generator(), P, Q) == pytest.approx(0.25, abs=1e-15)
    for gen in ALL_GENERATORS:
        assert dv.f_divergence_discrete(gen, Q, Q) == pytest.approx(0.0, abs=1e-15)


def test_f_divergence_dimension():
    with pytest.raises(DimensionError):
        dv.f_divergence_discrete(dv.kl_generator(), P, [0.2, 0.3, 0.5])


def test_discrete_distribution_validation():
    with pytest.raises(ValueError):
        dv.DiscreteDistribution([0.5, 0.6])
    with pytest.raises(ValueError):
        dv.DiscreteDistribution([-0.1, 1.1])


def test_zero_conventions():
    p, q = [0.5, 0.5, 0.0], [0.5, 0.25, 0.25]
    # p_i = 0 < q_i: KL uses the finite slope at infinity (0), reverse KL diverges
    assert dv.f_divergence_discrete(dv.kl_generator(), p, q) == pytest.approx(0.5 * np.log(2), abs=1e-12)
    assert dv.f_divergence_discrete(dv.reverse_kl_generator(), p, q) == np.inf
    with pytest.raises(SupportError):
        dv.f_divergence_discrete(dv.reverse_kl_generator(), p, q, strict=True)
    # q_i = 0 < p_i: finite for TV and JS, infinite for KL
    assert dv.f_divergence_discrete(dv.tv_generator(), q, p) == pytest.approx(0.25)
    assert np.isfinite(dv.f_divergence_discrete(dv.js_generator(), q, p))
    assert dv.f_divergence_discrete(dv.kl_generator(), q, p) == np.inf


def test_js_matches_direct_formula(rng):
    for _ in range(20):
        p, q = rng.dirichlet(np.ones(4), 2)
        m = 0.5 * (p + q)
        direct = 0.5 * np.sum(p * np.log(p / m)) + 0.5 * np.sum(q * np.log(q / m))
        assert dv.js_discrete(p, q) == pytest.approx(direct, abs=1e-13)


def test_sqrt_js_triangle(rng):
    for _ in range(10_000):
        p, q, r = rng.dirichlet(np.full(3, 0.7), 3)
        assert np.sqrt(dv.js_discrete(p, r)) <= np.sqrt(dv.js_discrete(p, q)) + np.sqrt(dv.js_discrete(q, r)) + 1e-12


# --- axioms ---------------------------------------------------------------

def _kl_param(a, b):
    return dv.kl_discrete(np.append(a, 1 - a.sum()), np.append(b, 1 - b.sum()))


def test_divergence_axioms_at_diagonal(rng):
    for _ in range(20):
        x = rng.dirichlet(np.ones(3))[:2]
        grad = cc.fd_gradient(lambda y: _kl_param(x, y), x)
        assert np.max(np.abs(grad)) <= 1e-5
        g = -np.array([[_mixed(x, i, j) for j in range(2)] for i in range(2)])
        assert np.linalg.eigvalsh(g).min() > 0


def _mixed(x, i, j, h=1e-4):
    ei, ej = np.eye(2)[i] * h, np.eye(2)[j] * h
    f = _kl_param
    return (f(x + ei, x + ej) - f(x + ei, x - ej) - f(x - ei, x + ej) + f(x - ei, x - ej)) / (4 * h * h)


# --- continuous -----------------------------------------------------------

def test_continuous_examples():
    p, q = norm(0, 1).pdf, norm(1, 1).pdf
    assert dv.f_divergence_continuous(dv.kl_generator(), p, p) == pytest.approx(0.0, abs=1e-9)
    assert dv.f_divergence_continuous(dv.kl_generator(), p, q) == pytest.approx(0.5, abs=1e-9)
    assert dv.f_divergence_continuous(dv.hellinger_generator(), p, q) == pytest.approx(2 * (1 - np.exp(-1 / 8)), abs=1e-9)


def test_continuous_heavy_tails():
    from scipy.stats import cauchy
    p, q = cauchy(0, 1).pdf, cauchy(1, 1).pdf
    # KL between Cauchy laws: log((g1+g2)^2 + d^2) / (4 g1 g2))
    val = dv.f_divergence_continuous(dv.kl_generator(), p, q, heavy_tails=True, tol=1e-10)
    assert val == pytest.approx(np.log(5 / 4), abs=1e-8)


# --- coarse graining ---------------------------------------------------------

def test_coarse_grain_examples():
    p = [0.1, 0.2, 0.3, 0.4]
    np.testing.assert_allclose(dv.coarse_grain(p, [[0], [1], [2], [3]]).probs, p)
    np.testing.assert_allclose(dv.coarse_grain(p, [[0, 1], [2, 3]]).probs, [0.3, 0.7])


@pytest.mark.parametrize("bad", [[[0, 1], [1, 2, 3]], [[0, 1], [2]], [[0, 1, 2, 3, 4]]])
def test_coarse_grain_rejects(bad):
    with pytest.raises(PartitionError):
        dv.coarse_grain([0.1, 0.2, 0.3, 0.4], bad)


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def test_monotonicity_all_partitions():
    p, q = [0.1, 0.2, 0.3, 0.4], [0.4, 0.3, 0.2, 0.1]
    full = dv.kl_discrete(p, q)
    parts = [s for s in _set_partitions([0, 1, 2, 3]) if 2 <= len(s) <= 3]
    assert len(parts) == 13  # 7 two-block + 6 three-block partitions
    for part in parts:
        assert dv.kl_discrete(dv.coarse_grain(p, part), dv.coarse_grain(q, part)) <= full + 1e-12


def random_partition(rng, D):
    labels = rng.integers(0, rng.integers(1, D + 1), D)
    return [list(np.nonzero(labels == b)[0]) for b in np.unique(labels)]


MONOTONE_GENERATORS = [dv.kl_generator(), dv.tv_generator(), dv.hellinger_generator(), dv.js_generator()] + [
    dv.alpha_generator(a) for a in (-0.5, 0.5, 2.0)]


@pytest.mark.parametrize("gen", MONOTONE_GENERATORS, ids=lambda g: g.name)
def test_information_monotonicity(gen, rng):
    for _ in range(2000):
        D = rng.integers(2, 7)
        p, q = rng.dirichlet(np.ones(D), 2)
        part = random_partition(rng, D)
        coarse = dv.f_divergence_discrete(gen, dv.coarse_grain(p, part), dv.coarse_grain(q, part))
        assert coarse <= dv.f_divergence_discrete(gen, p, q) + 1e-12


@given(simplex_points(4), simplex_points(4))
def test_kl_nonnegative_property(p, q):
    p, q = p / p.sum(), q / q.sum()
    assert dv.kl_discrete(p, q) >= -1e-15
