import numpy as np
import pytest

from infogeo import convexcore as cc, divergences as dv, mixfam
from infogeo.errors import DomainError
from infogeo.quadrature import integrate_interval

NEG_GAUSS_ENTROPY = -0.5 * np.log(2 * np.pi * np.e)


def lgc():
    return mixfam.MixtureFamily([mixfam.ComponentDensity.laplace(2, 1), mixfam.ComponentDensity.gaussian(0, 1),
                                 mixfam.ComponentDensity.cauchy(-1, 0.5)])


def two_gauss(mu2=4.0):
    return mixfam.MixtureFamily([mixfam.ComponentDensity.gaussian(0, 1), mixfam.ComponentDensity.gaussian(mu2, 1)])


@pytest.mark.parametrize("comp", [mixfam.ComponentDensity.gaussian(1, 2), mixfam.ComponentDensity.laplace(-1, 0.5),
                                  mixfam.ComponentDensity.cauchy(0.5, 0.3)], ids=lambda c: c.kind)
def test_component_normalized(comp):
    heavy = comp.kind == "cauchy"
    assert integrate_interval(comp.pdf, heavy_tails=heavy, tol=1e-11) == pytest.approx(1.0, abs=1e-8)


def test_component_json_round_trip():
    spec = {"components": [{"kind": "gaussian", "mu": 0, "sigma": 1}, {"kind": "laplace", "mu": 2, "b": 1},
                           {"kind": "cauchy", "x0": -1, "gamma": 0.5}]}
    fam = mixfam.parse_mixture(spec)
    assert fam.k == 3 and fam.dim == 2
    assert [c.to_dict() for c in fam.components] == spec["components"]


def test_component_rejects_bad_scale():
    with pytest.raises(ValueError):
        mixfam.ComponentDensity.gaussian(0, -1)


def test_density_is_pdf(rng):
    fam = lgc()
    for _ in range(3):
        theta = rng.dirichlet(np.ones(3))[:2]
        assert integrate_interval(lambda x: fam.density(theta, x), heavy_tails=True, tol=1e-10) == pytest.approx(1.0, abs=1e-7)


def test_boundary_policy():
    fam = lgc()
    with pytest.raises(DomainError):
        fam.check([1e-10, 0.5])
    with pytest.raises(DomainError):
        fam.check([0.5, 0.5])
    fam.check([1e-9, 0.5])


def test_generator_exact_near_boundary():
    fam = two_gauss(3.0)
    assert fam.generator_exact([1 - 1e-9]) == pytest.approx(NEG_GAUSS_ENTROPY, abs=1e-6)


def test_generator_exact_collapsed_mixture():
    fam = two_gauss(0.0)
    for t in (0.1, 0.5, 0.9):
        assert mixfam.generator_exact(fam, [t]) == pytest.approx(NEG_GAUSS_ENTROPY, abs=1e-8)


def test_generator_exact_matches_plain_mc():
    fam = lgc()
    theta = np.array([1 / 3, 1 / 3])
    x = fam.sample(theta, 1_000_000, seed=5)
    vals = fam.log_density(theta, x)
    mc, se = vals.mean(), vals.std(ddof=1) / np.sqrt(x.size)
    assert abs(fam.generator_exact(theta) - mc) <= 3 * se


def test_mc_generator_clt_and_determinism():
    fam = lgc()
    gen = mixfam.mc_generator(fam, 20_000, seed=3)
    theta = np.array([0.3, 0.4])
    terms = gen.potential  # exercise the PotentialFunction view
    assert terms.value(theta) == gen.value(theta)
    w = fam.density(theta, gen.samples)
    vals = w * np.log(w) / gen.proposal_pdf
    assert abs(gen.value(theta) - fam.generator_exact(theta)) <= 3 * vals.std(ddof=1) / np.sqrt(gen.m)
    again = mixfam.mc_generator(fam, 20_000, seed=3)
    assert again.value(theta) == gen.value(theta)


def test_mc_generator_convex(rng):
    gen = mixfam.mc_generator(lgc(), 2000, seed=1)
    for _ in range(100):
        a, b = rng.dirichlet(np.ones(3), 2)[:, :2]
        assert gen.value(0.5 * (a + b)) <= 0.5 * (gen.value(a) + gen.value(b)) + 1e-12


def test_mc_generator_derivatives_match_fd():
    gen = mixfam.mc_generator(lgc(), 2000, seed=2)
    theta = np.array([0.25, 0.35])
    np.testing.assert_allclose(gen.gradient(theta), cc.fd_gradient(gen.value, theta), rtol=1e-6, atol=1e-8)
    np.testing.assert_allclose(gen.hessian(theta), cc.fd_hessian(gen.value, theta), rtol=1e-4, atol=1e-6)


def test_kl_examples():
    fam = two_gauss()
    t1, t2 = np.array([0.2]), np.array([0.8])
    assert mixfam.kl_mixtures(fam, t1, t1) == pytest.approx(0.0, abs=1e-12)
    q = fam.kl(t1, t2)
    assert q == pytest.approx(dv.bregman(fam.exact_potential(), t1, t2), abs=1e-6)
    val, se = mixfam.mc_generator(fam, 10_000, seed=0).bregman(t1, t2)
    assert abs(val - q) <= 3 * se
    # the pair 0.2 / 0.8 is mirror-symmetric under x -> 4 - x, so use 0.6 for asymmetry
    t3 = np.array([0.6])
    assert abs(fam.kl(t1, t3) - fam.kl(t3, t1)) > 1e-3
    assert fam.kl(t2, t1) == pytest.approx(q, abs=1e-9)


def test_fim_matches_generator_hessian():
    fam = lgc()
    theta = np.array([0.3, 0.3])
    I = fam.fim(theta)
    H = cc.fd_hessian(fam.generator_exact, theta, fam.domain)
    np.testing.assert_allclose(I, H, atol=1e-4)
    assert np.linalg.eigvalsh(I).min() > 0


def test_nested_subsets():
    gen = mixfam.mc_generator(lgc(), 1000, seed=4)
    sub = gen.subset(100)
    np.testing.assert_array_equal(sub.samples, gen.samples[:100])
    with pytest.raises(ValueError):
        gen.subset(2000)


def test_consistency_inside_mc_manifold(rng):
    gen = mixfam.mc_generator(lgc(), 500, seed=6)
    F = gen.potential
    for _ in range(20):
        a, b = rng.dirichlet(np.ones(3), 2)[:, :2]
        assert dv.bregman(F, a, b) >= 0
        eta = cc.grad(F, a)
        np.testing.assert_allclose(cc.legendre_conjugate(F, eta).theta, a, atol=1e-8)
