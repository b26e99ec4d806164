"""Exponential families in canonical form.

A member has log-density ``<t(x), theta> - F(theta) + k(x)`` where ``F`` is
the cumulant (log-normalizer) potential.  The KL divergence between two
members is the Bregman divergence of ``F`` with the arguments swapped.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import gammaln

from . import convexcore as cc
from .convexcore import PotentialFunction
from .divergences import FGenerator, bregman, f_divergence_continuous
from .errors import DomainError

LOG_2PI = float(np.log(2 * np.pi))


@dataclass(frozen=True, eq=False)
class ExponentialFamily:
    """Canonical exponential family.

    ``sufficient`` maps an array of observations of shape ``(n,)`` to an
    ``(n, D)`` array of sufficient statistics; ``carrier`` maps it to the
    ``(n,)`` log-carrier values.  ``sampler(theta, n, rng)`` draws ``n``
    observations.  Discrete families set ``discrete`` and enumerate their
    support with ``support_values``; continuous ones give an interval.
    """

    name: str
    potential: PotentialFunction
    sufficient: Callable[[np.ndarray], np.ndarray]
    carrier: Callable[[np.ndarray], np.ndarray]
    sampler: Callable[[np.ndarray, int, np.random.Generator], np.ndarray]
    discrete: bool
    support: tuple = (-np.inf, np.inf)
    support_values: Optional[Callable[[np.ndarray], np.ndarray]] = None
    params: tuple = ()

    @property
    def dim(self) -> int:
        return self.potential.dim

    def check(self, theta) -> np.ndarray:
        return self.potential.domain.check(theta, "natural parameter")

    def log_density(self, theta, x) -> np.ndarray:
        theta = self.check(theta)
        x = np.asarray(x)
        scalar = x.ndim == 0
        xs = np.atleast_1d(x)
        out = self.sufficient(xs) @ theta - self.potential.value(theta) + self.carrier(xs)
        return float(out[0]) if scalar else out

    def density(self, theta, x):
        return np.exp(self.log_density(theta, x))

    def theta_to_eta(self, theta) -> np.ndarray:
        return cc.grad(self.potential, self.check(theta))

    def eta_to_theta(self, eta) -> np.ndarray:
        return cc.eta_to_theta(self.potential, eta)

    def fim(self, theta) -> np.ndarray:
        return cc.hessian(self.potential, self.check(theta))

    def score(self, theta, x) -> np.ndarray:
        """Per-observation gradient of the log-density, shape ``(n, D)``."""
        theta = self.check(theta)
        return self.sufficient(np.atleast_1d(x)) - cc.grad(self.potential, theta)

    def log_density_hessian(self, theta, x) -> np.ndarray:
        """Per-observation Hessian of the log-density: ``-hess F`` for every x."""
        n = np.atleast_1d(x).shape[0]
        H = self.fim(theta)
        return np.broadcast_to(-H, (n,) + H.shape)

    def kl(self, theta1, theta2) -> float:
        """``KL(p_theta1 : p_theta2) = B_F(theta2 : theta1)``."""
        return bregman(self.potential, self.check(theta2), self.check(theta1))

    def sample(self, theta, n: int, seed=None) -> np.ndarray:
        if n < 1:
            raise ValueError("sample size must be positive")
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        return self.sampler(self.check(theta), int(n), rng)

    def mle(self, x) -> np.ndarray:
        """Moment-matching maximum-likelihood estimate of theta."""
        eta = np.mean(self.sufficient(np.atleast_1d(x)), axis=0)
        return self.eta_to_theta(eta)

    def total_mass(self, theta) -> float:
        """Sum or integral of the density; 1 up to numerical error."""
        theta = self.check(theta)
        if self.discrete:
            return float(np.sum(self.density(theta, self.support_values(theta))))
        from .quadrature import integrate_interval

        return integrate_interval(lambda x: self.density(theta, x), *self.support, tol=1e-10)

    def f_divergence(self, gen: FGenerator, theta1, theta2, tol: float = 1e-9, rel_tol: float = 1e-10) -> float:
        """``I_f[p_theta1 : p_theta2]`` by exact summation or quadrature."""
        theta1 = self.check(theta1)
        theta2 = self.check(theta2)
        if self.discrete:
            xs = np.union1d(self.support_values(theta1), self.support_values(theta2))
            p = self.density(theta1, xs)
            q = self.density(theta2, xs)
            keep = p > 0
            return float(np.sum(p[keep] * gen(q[keep] / p[keep])))
        return f_divergence_continuous(
            gen,
            lambda x: self.density(theta1, x),
            lambda x: self.density(theta2, x),
            self.support,
            tol=tol,
            rel_tol=rel_tol,
        )

    def kl_numeric(self, theta1, theta2) -> float:
        """KL by summation or quadrature of ``p1 (log p1 - log p2)``.

        Working with log-densities keeps the integrand finite in tails where
        ``p2`` underflows before ``p1`` does.
        """
        theta1 = self.check(theta1)
        theta2 = self.check(theta2)

        def integrand(x):
            l1 = self.log_density(theta1, x)
            l2 = self.log_density(theta2, x)
            p1 = np.exp(l1)
            return np.where(p1 > 0, p1 * (l1 - l2), 0.0)

        if self.discrete:
            xs = np.union1d(self.support_values(theta1), self.support_values(theta2))
            return float(np.sum(integrand(xs)))
        from .quadrature import integrate_interval

        return integrate_interval(lambda x: float(integrand(np.atleast_1d(x))[0]), *self.support,
                                  tol=1e-10, rel_tol=1e-12)


# module-level operations


def log_density(fam: ExponentialFamily, theta, x):
    return fam.log_density(theta, x)


def fim(fam: ExponentialFamily, theta) -> np.ndarray:
    return fam.fim(theta)


def kl(fam: ExponentialFamily, theta1, theta2) -> float:
    return fam.kl(theta1, theta2)


def sample(fam: ExponentialFamily, theta, n: int, seed=None) -> np.ndarray:
    return fam.sample(theta, n, seed)


# ---------------------------------------------------------------------------
# built-in families


def _col(x):
    return np.asarray(x, dtype=float).reshape(-1, 1)


def bernoulli() -> ExponentialFamily:
    def sampler(theta, n, rng):
        p = float(cc.grad(F, theta)[0])
        return (rng.random(n) < p).astype(float)

    F = cc.bernoulli_potential()
    return ExponentialFamily(
        "bernoulli",
        F,
        sufficient=_col,
        carrier=lambda x: np.zeros(np.shape(x)[0]),
        sampler=sampler,
        discrete=True,
        support=(0, 1),
        support_values=lambda theta: np.array([0.0, 1.0]),
    )


def categorical(k: int) -> ExponentialFamily:
    """Categorical over outcomes ``0..k-1``; outcome ``k-1`` is the reference."""
    F = cc.categorical_potential(k)

    def sufficient(x):
        x = np.asarray(x).astype(int).reshape(-1)
        if np.any((x < 0) | (x >= k)):
            raise DomainError(f"categorical outcome outside 0..{k - 1}")
        t = np.zeros((x.size, k - 1))
        mask = x < k - 1
        t[np.nonzero(mask)[0], x[mask]] = 1.0
        return t

    def sampler(theta, n, rng):
        p = cc.grad(F, theta)
        probs = np.append(p, max(0.0, 1.0 - p.sum()))
        return rng.choice(k, size=n, p=probs / probs.sum()).astype(float)

    return ExponentialFamily(
        f"categorical({k})",
        F,
        sufficient=sufficient,
        carrier=lambda x: np.zeros(np.shape(x)[0]),
        sampler=sampler,
        discrete=True,
        support=(0, k - 1),
        support_values=lambda theta: np.arange(k, dtype=float),
        params=(("k", k),),
    )


def poisson() -> ExponentialFamily:
    F = cc.poisson_potential()

    def support_values(theta):
        lam = float(np.exp(theta[0]))
        hi = int(np.ceil(lam + 40.0 * np.sqrt(lam) + 60.0))
        return np.arange(hi + 1, dtype=float)

    return ExponentialFamily(
        "poisson",
        F,
        sufficient=_col,
        carrier=lambda x: -gammaln(np.asarray(x, dtype=float) + 1.0),
        sampler=lambda theta, n, rng: rng.poisson(np.exp(theta[0]), size=n).astype(float),
        discrete=True,
        support=(0, np.inf),
        support_values=support_values,
    )


def gaussian_fixed_var(sigma: float = 1.0) -> ExponentialFamily:
    """Location family ``N(theta, sigma^2)``; t(x) = x / sigma^2 so theta = mu."""
    s2 = float(sigma) ** 2
    F = cc.gaussian_location_potential(sigma)
    return ExponentialFamily(
        f"gaussian_fixed_var(sigma={sigma:g})",
        F,
        sufficient=lambda x: _col(x) / s2,
        carrier=lambda x: -np.asarray(x, dtype=float) ** 2 / (2 * s2) - 0.5 * (LOG_2PI + np.log(s2)),
        sampler=lambda theta, n, rng: rng.normal(theta[0], sigma, size=n),
        discrete=False,
        params=(("sigma", float(sigma)),),
    )


def gaussian_theta(mu: float, sigma: float) -> np.ndarray:
    """Natural parameters of ``N(mu, sigma^2)`` in :func:`gaussian`."""
    return np.array([mu / sigma**2, -0.5 / sigma**2])


def gaussian_mean_sd(theta) -> tuple[float, float]:
    var = -0.5 / theta[1]
    return float(theta[0] * var), float(np.sqrt(var))


def gaussian() -> ExponentialFamily:
    """Univariate Gaussian with t(x) = (x, x^2)."""

    def sampler(theta, n, rng):
        mu, sd = gaussian_mean_sd(theta)
        return rng.normal(mu, sd, size=n)

    return ExponentialFamily(
        "gaussian",
        cc.gaussian_potential(),
        sufficient=lambda x: np.column_stack([np.asarray(x, dtype=float), np.asarray(x, dtype=float) ** 2]),
        carrier=lambda x: np.full(np.shape(x)[0], -0.5 * LOG_2PI),
        sampler=sampler,
        discrete=False,
    )


def exponential() -> ExponentialFamily:
    """Exponential distribution with theta = -rate and t(x) = x."""

    def carrier(x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, 0.0, -np.inf)

    return ExponentialFamily(
        "exponential",
        cc.exponential_potential(),
        sufficient=_col,
        carrier=carrier,
        sampler=lambda theta, n, rng: rng.exponential(-1.0 / theta[0], size=n),
        discrete=False,
        support=(0.0, np.inf),
    )


def by_name(name: str, **params) -> ExponentialFamily:
    """Build a family from its CLI name and keyword parameters."""
    if name == "bernoulli":
        return bernoulli()
    if name == "categorical":
        return categorical(int(params["k"]))
    if name == "poisson":
        return poisson()
    if name == "gaussian_fixed_var":
        return gaussian_fixed_var(float(params.get("sigma", 1.0)))
    if name == "gaussian":
        return gaussian()
    if name == "exponential":
        return exponential()
    raise KeyError(name)
