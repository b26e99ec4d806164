"""Mixture families with prescribed components (w-mixtures).

The mixture ``m(x; theta) = sum_i theta_i p_i(x) + (1 - sum theta) p_0(x)``
is affine in ``theta``, and its negative differential entropy
``F(theta) = int m log m`` is a convex potential whose Bregman divergence is
the KL divergence between mixtures.  ``F`` has no closed form; a fixed
importance sample turns it into a tractable convex surrogate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .convexcore import PotentialFunction, Simplex, as_point
from .errors import DimensionError, DomainError
from .quadrature import integrate_interval

# closest admissible distance to the simplex boundary
BOUNDARY = 1e-9
_SQRT2PI = np.sqrt(2 * np.pi)


@dataclass(frozen=True)
class ComponentDensity:
    """A fixed univariate component: gaussian(mu, sigma), laplace(mu, b) or cauchy(x0, gamma)."""

    kind: str
    loc: float
    scale: float

    def __post_init__(self):
        if self.kind not in ("gaussian", "laplace", "cauchy"):
            raise ValueError(f"unknown component kind {self.kind!r}")
        if not self.scale > 0:
            raise ValueError("component scale must be positive")

    @classmethod
    def gaussian(cls, mu=0.0, sigma=1.0):
        return cls("gaussian", float(mu), float(sigma))

    @classmethod
    def laplace(cls, mu=0.0, b=1.0):
        return cls("laplace", float(mu), float(b))

    @classmethod
    def cauchy(cls, x0=0.0, gamma=1.0):
        return cls("cauchy", float(x0), float(gamma))

    @classmethod
    def from_dict(cls, d: dict) -> "ComponentDensity":
        kind = d["kind"]
        if kind == "gaussian":
            return cls.gaussian(d.get("mu", 0.0), d.get("sigma", 1.0))
        if kind == "laplace":
            return cls.laplace(d.get("mu", 0.0), d.get("b", 1.0))
        if kind == "cauchy":
            return cls.cauchy(d.get("x0", 0.0), d.get("gamma", 1.0))
        raise ValueError(f"unknown component kind {kind!r}")

    def to_dict(self) -> dict:
        names = {"gaussian": ("mu", "sigma"), "laplace": ("mu", "b"), "cauchy": ("x0", "gamma")}[self.kind]
        return {"kind": self.kind, names[0]: self.loc, names[1]: self.scale}

    def pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.loc) / self.scale
        if self.kind == "gaussian":
            return np.exp(-0.5 * z * z) / (_SQRT2PI * self.scale)
        if self.kind == "laplace":
            return np.exp(-np.abs(z)) / (2.0 * self.scale)
        return 1.0 / (np.pi * self.scale * (1.0 + z * z))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "gaussian":
            return rng.normal(self.loc, self.scale, size=n)
        if self.kind == "laplace":
            return rng.laplace(self.loc, self.scale, size=n)
        return self.loc + self.scale * rng.standard_cauchy(size=n)


@dataclass(frozen=True, eq=False)
class MixtureFamily:
    """Mixtures of ``k >= 2`` prescribed components; order ``D = k - 1``.

    Component 0 carries the residual weight ``1 - sum(theta)``.
    """

    components: tuple

    def __post_init__(self):
        comps = tuple(c if isinstance(c, ComponentDensity) else ComponentDensity.from_dict(c) for c in self.components)
        if len(comps) < 2:
            raise ValueError("a mixture family needs at least two components")
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_dict(cls, spec: dict) -> "MixtureFamily":
        return cls(tuple(ComponentDensity.from_dict(c) for c in spec["components"]))

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def dim(self) -> int:
        return self.k - 1

    @property
    def heavy_tails(self) -> bool:
        return any(c.kind == "cauchy" for c in self.components)

    @property
    def domain(self) -> Simplex:
        return Simplex(self.dim)

    def check(self, theta) -> np.ndarray:
        theta = as_point(theta)
        if theta.size != self.dim:
            raise DimensionError(f"mixture weights need {self.dim} entries, got {theta.size}")
        slack = 1e-15
        if np.any(theta < BOUNDARY - slack) or theta.sum() > 1.0 - BOUNDARY + slack:
            raise DomainError(f"weights {theta.tolist()} are within {BOUNDARY} of the simplex boundary")
        return theta

    def weights(self, theta) -> np.ndarray:
        theta = self.check(theta)
        return np.concatenate([[1.0 - theta.sum()], theta])

    def component_pdfs(self, x) -> np.ndarray:
        """Array of shape ``(n, k)`` with ``p_i(x_n)``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.column_stack([c.pdf(x) for c in self.components])

    def density(self, theta, x):
        w = self.weights(theta)
        scalar = np.ndim(x) == 0
        out = self.component_pdfs(x) @ w
        return float(out[0]) if scalar else out

    def log_density(self, theta, x):
        return np.log(self.density(theta, x))

    def score(self, theta, x) -> np.ndarray:
        """``(p_i(x) - p_0(x)) / m(x; theta)``, shape ``(n, D)``."""
        P = self.component_pdfs(x)
        m = P @ self.weights(theta)
        return (P[:, 1:] - P[:, :1]) / m[:, None]

    def log_density_hessian(self, theta, x) -> np.ndarray:
        s = self.score(theta, x)
        return -np.einsum("ni,nj->nij", s, s)

    def sample(self, theta, n: int, seed=None) -> np.ndarray:
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        w = self.weights(theta)
        labels = rng.choice(self.k, size=n, p=w / w.sum())
        out = np.empty(n)
        for i, comp in enumerate(self.components):
            idx = np.nonzero(labels == i)[0]
            if idx.size:
                out[idx] = comp.sample(idx.size, rng)
        return out

    # quadrature ------------------------------------------------------------

    def _tol(self, tol):
        if tol is None:
            return 1e-6 if self.heavy_tails else 1e-8
        return tol

    def _integrate(self, f, tol, rel_tol=1e-10):
        if self.heavy_tails:
            return integrate_interval(f, tol=tol, rel_tol=rel_tol, heavy_tails=True,
                                      points=sorted({c.loc for c in self.components}))
        return integrate_interval(f, tol=tol, rel_tol=rel_tol)

    def generator_exact(self, theta, tol=None) -> float:
        """Negative differential entropy ``int m log m`` by quadrature."""
        w = self.weights(theta)

        def integrand(x):
            m = float((self.component_pdfs(x) @ w)[0])
            return m * np.log(m) if m > 0 else 0.0

        return self._integrate(integrand, self._tol(tol))

    def generator_gradient(self, theta, tol=None) -> np.ndarray:
        """``int (p_i - p_0) log m`` for each free weight."""
        w = self.weights(theta)

        def part(i):
            def integrand(x):
                P = self.component_pdfs(x)[0]
                m = float(P @ w)
                return (P[i] - P[0]) * np.log(m) if m > 0 else 0.0
            return self._integrate(integrand, self._tol(tol))

        return np.array([part(i) for i in range(1, self.k)])

    def fim(self, theta, tol=None) -> np.ndarray:
        """Fisher information ``int (p_i - p_0)(p_j - p_0) / m``, the Hessian of ``F``."""
        w = self.weights(theta)
        D = self.dim
        out = np.empty((D, D))
        for i in range(D):
            for j in range(i, D):
                def integrand(x, i=i, j=j):
                    P = self.component_pdfs(x)[0]
                    m = float(P @ w)
                    return (P[i + 1] - P[0]) * (P[j + 1] - P[0]) / m if m > 0 else 0.0
                out[i, j] = out[j, i] = self._integrate(integrand, self._tol(tol))
        return out

    def exact_potential(self, tol=None) -> PotentialFunction:
        """The entropy potential with quadrature gradient and Hessian."""
        return PotentialFunction(
            dim=self.dim,
            domain=self.domain,
            value=lambda t: self.generator_exact(t, tol),
            gradient=lambda t: self.generator_gradient(t, tol),
            hessian=lambda t: self.fim(t, tol),
            name="mixture negative entropy",
        )

    def kl(self, theta1, theta2, tol=None) -> float:
        """``KL(m_theta1 : m_theta2)`` by quadrature."""
        w1 = self.weights(theta1)
        w2 = self.weights(theta2)

        def integrand(x):
            P = self.component_pdfs(x)[0]
            a = float(P @ w1)
            b = float(P @ w2)
            if a <= 0.0:
                return 0.0
            return a * np.log(a / b)

        return max(self._integrate(integrand, self._tol(tol)), 0.0)


def generator_exact(fam: MixtureFamily, theta, tol=None) -> float:
    return fam.generator_exact(theta, tol)


def kl_mixtures(fam: MixtureFamily, theta1, theta2, tol=None) -> float:
    return fam.kl(theta1, theta2, tol)


# ---------------------------------------------------------------------------
# Monte-Carlo generator


@dataclass(frozen=True, eq=False)
class MonteCarloGenerator:
    """Convex surrogate ``F_S(theta) = mean_s m(x_s) log m(x_s) / q(x_s)``.

    ``S`` is drawn once from the proposal ``q``, the equal-weight mixture of
    all components.  ``theta -> m(x_s; theta)`` is affine and ``u log u`` is
    convex, so ``F_S`` is exactly convex for any sample, and every quantity
    derived from it forms a consistent dually flat geometry.
    """

    base: MixtureFamily
    samples: np.ndarray
    proposal_pdf: np.ndarray
    component_values: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return self.samples.size

    @property
    def dim(self) -> int:
        return self.base.dim

    def _mix(self, theta) -> np.ndarray:
        return self.component_values @ self.base.weights(theta)

    def value(self, theta) -> float:
        mx = self._mix(theta)
        return float(np.mean(mx * np.log(mx) / self.proposal_pdf))

    def gradient(self, theta) -> np.ndarray:
        mx = self._mix(theta)
        diff = self.component_values[:, 1:] - self.component_values[:, :1]
        return ((np.log(mx) + 1.0) / self.proposal_pdf) @ diff / self.m

    def hessian(self, theta) -> np.ndarray:
        mx = self._mix(theta)
        diff = self.component_values[:, 1:] - self.component_values[:, :1]
        wd = diff / np.sqrt(mx * self.proposal_pdf)[:, None]
        return wd.T @ wd / self.m

    def bregman_terms(self, theta1, theta2) -> np.ndarray:
        """Per-sample contributions whose mean is ``B_{F_S}(theta1 : theta2)``."""
        a = self._mix(theta1)
        b = self._mix(theta2)
        return (a * np.log(a / b) - a + b) / self.proposal_pdf

    def bregman(self, theta1, theta2) -> tuple[float, float]:
        """Bregman divergence of the surrogate and its Monte-Carlo standard error."""
        terms = self.bregman_terms(theta1, theta2)
        return float(terms.mean()), float(terms.std(ddof=1) / np.sqrt(terms.size))

    def subset(self, m: int) -> "MonteCarloGenerator":
        """Generator on the first ``m`` samples (nested sample sets)."""
        if not 1 <= m <= self.m:
            raise ValueError(f"subset size {m} outside 1..{self.m}")
        return MonteCarloGenerator(self.base, self.samples[:m], self.proposal_pdf[:m], self.component_values[:m])

    @property
    def potential(self) -> PotentialFunction:
        return PotentialFunction(
            dim=self.dim,
            domain=self.base.domain,
            value=self.value,
            gradient=self.gradient,
            hessian=self.hessian,
            reference=tuple(self.base.domain.interior_point()),
            name=f"monte-carlo mixture entropy (m={self.m})",
        )


def mc_generator(fam: MixtureFamily, m: int, seed=None) -> MonteCarloGenerator:
    if m < 1:
        raise ValueError("sample size must be positive")
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, fam.k, size=m)
    xs = np.empty(m)
    for i, comp in enumerate(fam.components):
        idx = np.nonzero(labels == i)[0]
        if idx.size:
            xs[idx] = comp.sample(idx.size, rng)
    P = fam.component_pdfs(xs)
    return MonteCarloGenerator(fam, xs, P.mean(axis=1), P)


def parse_mixture(spec: dict | Sequence) -> MixtureFamily:
    if isinstance(spec, dict):
        return MixtureFamily.from_dict(spec)
    return MixtureFamily(tuple(ComponentDensity.from_dict(c) for c in spec))
