"""Bayesian hypothesis testing on exponential-family manifolds.

Convention: the exponential geodesic is ``theta_a = (1 - a) theta1 + a theta2``
and the Bhattacharyya integrand paired with it is ``p1^(1-a) p2^a``.  With
that pairing the Chernoff exponent is the Bregman divergence from either
endpoint to the geodesic point where the two divergences balance.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq

from .convexcore import as_point
from .divergences import bregman, skew_jensen
from .errors import ConvergenceError, DegenerateError, DomainError, RangeError
from .expfam import ExponentialFamily
from .flatgeo import DuallyFlatManifold, m_bisector_value
from .quadrature import integrate_interval

ALPHA_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class BinaryHypothesis:
    family: ExponentialFamily
    theta1: np.ndarray
    theta2: np.ndarray
    prior: tuple = (0.5, 0.5)

    def __post_init__(self):
        w1, w2 = self.prior
        if w1 <= 0 or w2 <= 0 or abs(w1 + w2 - 1.0) > 1e-12:
            raise ValueError(f"invalid prior {self.prior}")
        object.__setattr__(self, "theta1", self.family.check(self.theta1))
        object.__setattr__(self, "theta2", self.family.check(self.theta2))


@dataclass(frozen=True)
class ChernoffResult:
    """``alpha_star`` is the geodesic parameter of ``theta_star``."""

    alpha_star: float
    value: float
    theta_star: np.ndarray


def _distinct(fam, theta1, theta2):
    theta1 = fam.check(theta1)
    theta2 = fam.check(theta2)
    if np.array_equal(theta1, theta2):
        raise ValueError("hypotheses must differ")
    return theta1, theta2


def bhattacharyya(fam: ExponentialFamily, theta1, theta2, alpha: float) -> float:
    """``-log int p1^alpha p2^(1-alpha)``, evaluated as a skew Jensen gap of the cumulant."""
    if not 0.0 < alpha < 1.0:
        raise RangeError(f"alpha must lie in (0, 1), got {alpha}")
    theta1 = fam.check(theta1)
    theta2 = fam.check(theta2)
    blend = alpha * theta1 + (1 - alpha) * theta2
    if not fam.potential.domain.contains(blend):
        raise DomainError("blended natural parameter left the (convex) domain")
    return skew_jensen(fam.potential, alpha, theta1, theta2)


def bhattacharyya_numeric(fam: ExponentialFamily, theta1, theta2, alpha: float) -> float:
    """The same coefficient by direct summation or quadrature of ``p1^alpha p2^(1-alpha)``."""
    theta1 = fam.check(theta1)
    theta2 = fam.check(theta2)

    def integrand(x):
        return np.exp(alpha * fam.log_density(theta1, x) + (1 - alpha) * fam.log_density(theta2, x))

    if fam.discrete:
        xs = np.union1d(fam.support_values(theta1), fam.support_values(theta2))
        coef = float(np.sum(integrand(xs)))
    else:
        coef = integrate_interval(integrand, *fam.support, tol=1e-13, rel_tol=1e-12)
    return -float(np.log(coef))


def _geodesic(theta1, theta2, a):
    return (1.0 - a) * theta1 + a * theta2


def chernoff(fam: ExponentialFamily, theta1, theta2, tol: float = ALPHA_TOL) -> ChernoffResult:
    """Chernoff information by bisection on the Bregman balance along the e-geodesic.

    ``g(a) = B(theta1 : theta_a) - B(theta2 : theta_a)`` increases from
    ``-B(theta2 : theta1)`` at 0 to ``B(theta1 : theta2)`` at 1.
    """
    theta1, theta2 = _distinct(fam, theta1, theta2)
    F = fam.potential

    def g(a):
        t = _geodesic(theta1, theta2, a)
        return bregman(F, theta1, t) - bregman(F, theta2, t)

    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    else:
        raise ConvergenceError("Chernoff bisection did not reach tolerance")
    a = 0.5 * (lo + hi)
    t = _geodesic(theta1, theta2, a)
    b1 = bregman(F, theta1, t)
    b2 = bregman(F, theta2, t)
    if abs(b1 - b2) > 1e-9 * max(1.0, b1):
        raise ConvergenceError(f"Bregman balance not reached ({b1} vs {b2})")
    return ChernoffResult(float(a), b1, t)


def bisector_intersection(fam: ExponentialFamily, theta1, theta2) -> np.ndarray:
    """Point where the e-geodesic crosses the m-bisector of the two hypotheses."""
    theta1, theta2 = _distinct(fam, theta1, theta2)
    mfd = DuallyFlatManifold(fam.potential)

    def h(a):
        return m_bisector_value(mfd, theta1, theta2, _geodesic(theta1, theta2, a))

    try:
        a = brentq(h, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    except (ValueError, RuntimeError) as exc:
        raise ConvergenceError(f"bisector root not bracketed: {exc}") from None
    return _geodesic(theta1, theta2, a)


class MAPSimulation(NamedTuple):
    error_rate: float
    exponent_estimate: float
    errors: int
    trials: int
    stderr: float
    reliable: bool


def map_error_simulation(h: BinaryHypothesis, n_obs: int, trials: int, seed=0) -> MAPSimulation:
    """Empirical error of the MAP rule on ``n_obs`` iid observations.

    Each trial draws the true class from the prior, then its observations,
    and decides by comparing ``log w + sum log p``.  Exponent estimate:
    ``-log(error_rate) / n_obs``; flagged unreliable under 10 errors.
    """
    if n_obs < 1 or trials < 100:
        raise ValueError("need n_obs >= 1 and trials >= 100")
    fam = h.family
    rng = np.random.default_rng(seed)
    w1, w2 = h.prior
    truth = (rng.random(trials) >= w1).astype(int)  # 0 -> hypothesis 1
    n1 = int(np.sum(truth == 0))
    n2 = trials - n1
    x = np.empty((trials, n_obs))
    if n1:
        x[truth == 0] = fam.sample(h.theta1, n1 * n_obs, rng).reshape(n1, n_obs)
    if n2:
        x[truth == 1] = fam.sample(h.theta2, n2 * n_obs, rng).reshape(n2, n_obs)
    flat = x.ravel()
    ll1 = fam.log_density(h.theta1, flat).reshape(trials, n_obs).sum(axis=1) + np.log(w1)
    ll2 = fam.log_density(h.theta2, flat).reshape(trials, n_obs).sum(axis=1) + np.log(w2)
    # ties go to hypothesis 1
    decision = (ll2 > ll1).astype(int)
    errors = int(np.sum(decision != truth))
    rate = errors / trials
    se = float(np.sqrt(max(rate * (1 - rate), 1e-300) / trials))
    if errors == 0:
        raise DegenerateError("no classification errors: the exponent is not estimable at this n")
    return MAPSimulation(rate, float(-np.log(rate) / n_obs), errors, trials, se, errors >= 10)


class MultiChernoff(NamedTuple):
    pair: tuple
    value: float
    degenerate: bool


def multi_chernoff(fam: ExponentialFamily, thetas: Sequence) -> MultiChernoff:
    """Smallest pairwise Chernoff information over all hypothesis pairs (indices returned)."""
    pts = [fam.check(t) for t in thetas]
    if len(pts) < 2:
        raise ValueError("need at least two hypotheses")
    best = None
    for i, j in combinations(range(len(pts)), 2):
        if np.array_equal(pts[i], pts[j]):
            return MultiChernoff((i, j), 0.0, True)
        v = chernoff(fam, pts[i], pts[j]).value
        if best is None or v < best[1]:
            best = ((i, j), v)
    return MultiChernoff(best[0], best[1], False)
