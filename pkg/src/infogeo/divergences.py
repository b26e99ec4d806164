"""Parameter divergences (Bregman, canonical, skew Jensen) and f-divergences."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .convexcore import PotentialFunction, as_point, eta_to_theta, grad
from .errors import DegenerateGeneratorError, DimensionError, PartitionError, RangeError, SupportError
from .quadrature import integrate_interval

# ---------------------------------------------------------------------------
# parameter divergences


def bregman(F: PotentialFunction, theta1, theta2) -> float:
    """``F(theta1) - F(theta2) - <theta1 - theta2, grad F(theta2)>``.

    Round-off negatives are clipped to zero.
    """
    theta1 = F.domain.check(theta1, "theta1")
    theta2 = F.domain.check(theta2, "theta2")
    val = float(F.value(theta1)) - float(F.value(theta2)) - float((theta1 - theta2) @ grad(F, theta2))
    return max(val, 0.0)


def canonical(F: PotentialFunction, theta, eta_prime) -> float:
    """Mixed-coordinate divergence ``F(theta) + F*(eta') - <theta, eta'>``."""
    theta = F.domain.check(theta)
    eta_prime = as_point(eta_prime, F.dim)
    theta_p = eta_to_theta(F, eta_prime)
    f_star = float(theta_p @ eta_prime) - float(F.value(theta_p))
    return max(float(F.value(theta)) + f_star - float(theta @ eta_prime), 0.0)


def skew_jensen(F: PotentialFunction, alpha: float, theta1, theta2) -> float:
    """Jensen gap ``a F(t1) + (1-a) F(t2) - F(a t1 + (1-a) t2)`` for ``a`` in (0, 1)."""
    if not 0.0 < alpha < 1.0:
        raise RangeError(f"skew weight must lie in (0, 1), got {alpha}")
    theta1 = F.domain.check(theta1, "theta1")
    theta2 = F.domain.check(theta2, "theta2")
    mix = alpha * theta1 + (1.0 - alpha) * theta2
    val = alpha * float(F.value(theta1)) + (1.0 - alpha) * float(F.value(theta2)) - float(F.value(mix))
    return max(val, 0.0)


# ---------------------------------------------------------------------------
# f-generators


def _fd_derivatives_at_one(f: Callable) -> tuple[float, float, float]:
    h1 = np.finfo(float).eps ** (1 / 3)
    h2 = np.finfo(float).eps ** (1 / 4)
    h3 = 1e-3
    d1 = (f(1 + h1) - f(1 - h1)) / (2 * h1)
    d2 = (f(1 + h2) - 2 * f(1.0) + f(1 - h2)) / h2**2
    d3 = (f(1 + 2 * h3) - 2 * f(1 + h3) + 2 * f(1 - h3) - f(1 - 2 * h3)) / (2 * h3**3)
    return float(d1), float(d2), float(d3)


@dataclass(frozen=True, eq=False)
class FGenerator:
    """Convex generator ``f`` with ``f(1) = 0`` of an f-divergence.

    ``limit_zero`` is ``lim_{u->0+} f(u)`` and ``slope_inf`` is
    ``lim_{u->inf} f(u)/u``; they price outcomes missing from one side.
    Derivatives at 1 left as ``None`` are obtained by finite differences.
    """

    f: Callable[[np.ndarray], np.ndarray]
    name: str
    fprime1: Optional[float] = None
    fsecond1: Optional[float] = None
    fthird1: Optional[float] = None
    limit_zero: float = np.inf
    slope_inf: float = np.inf

    def __call__(self, u):
        return self.f(np.asarray(u, dtype=float))

    def derivatives_at_one(self) -> tuple[float, float, float]:
        if None in (self.fprime1, self.fsecond1, self.fthird1):
            d = _fd_derivatives_at_one(lambda u: float(self.f(np.asarray(u, dtype=float))))
        else:
            d = (np.nan,) * 3
        return (
            self.fprime1 if self.fprime1 is not None else d[0],
            self.fsecond1 if self.fsecond1 is not None else d[1],
            self.fthird1 if self.fthird1 is not None else d[2],
        )

    def is_standard(self, tol: float = 1e-8) -> bool:
        d1, d2, _ = self.derivatives_at_one()
        return abs(d1) <= tol and abs(d2 - 1.0) <= tol


def kl_generator() -> FGenerator:
    """``-log u``: gives KL(p : q) = sum p log(p / q)."""
    return FGenerator(lambda u: -np.log(u), "kl", -1.0, 1.0, -2.0, np.inf, 0.0)


def reverse_kl_generator() -> FGenerator:
    """``u log u``: gives KL(q : p)."""

    def f(u):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(u > 0, u * np.log(np.where(u > 0, u, 1.0)), 0.0)

    return FGenerator(f, "revkl", 1.0, 1.0, -1.0, 0.0, np.inf)


def hellinger_generator() -> FGenerator:
    """``(sqrt(u) - 1)^2``: twice the squared Hellinger distance."""
    return FGenerator(lambda u: (np.sqrt(u) - 1.0) ** 2, "hellinger", 0.0, 0.5, -0.75, 1.0, 1.0)


def js_generator() -> FGenerator:
    """Jensen-Shannon generator ``(u log u - (1 + u) log((1 + u)/2)) / 2``."""

    def f(u):
        with np.errstate(divide="ignore", invalid="ignore"):
            ulogu = np.where(u > 0, u * np.log(np.where(u > 0, u, 1.0)), 0.0)
        return 0.5 * (ulogu - (1.0 + u) * np.log((1.0 + u) / 2.0))

    log2 = float(np.log(2.0))
    return FGenerator(f, "js", 0.0, 0.25, -0.375, 0.5 * log2, 0.5 * log2)


def tv_generator() -> FGenerator:
    """``|u - 1| / 2`` (not differentiable at 1)."""
    return FGenerator(lambda u: 0.5 * np.abs(u - 1.0), "tv", np.nan, np.nan, np.nan, 0.5, 0.5)


def chi2_generator() -> FGenerator:
    """Pearson ``(u - 1)^2``."""
    return FGenerator(lambda u: (u - 1.0) ** 2, "chi2", 0.0, 2.0, 0.0, 1.0, np.inf)


def alpha_generator(alpha: float) -> FGenerator:
    """Standard alpha-divergence generator.

    ``4/(1-a^2) (1 - u^((1+a)/2)) + 2/(1-a) (u - 1)``; the endpoints
    ``a = -1`` and ``a = 1`` are the standardized KL and reverse-KL generators.
    """
    a = float(alpha)
    if a == -1.0:
        return standardize(kl_generator())
    if a == 1.0:
        return standardize(reverse_kl_generator())
    p = 0.5 * (1.0 + a)
    c = 4.0 / (1.0 - a * a)

    def f(u):
        return c * (1.0 - np.power(u, p)) + 2.0 / (1.0 - a) * (u - 1.0)

    lim0 = 2.0 / (1.0 + a) if a > -1 else np.inf
    slope = 2.0 / (1.0 - a) if a < 1 else np.inf
    return FGenerator(f, f"alpha({a:g})", 0.0, 1.0, 0.5 * (a - 3.0), lim0, slope)


BUILTIN_GENERATORS = {
    "kl": kl_generator,
    "revkl": reverse_kl_generator,
    "hellinger": hellinger_generator,
    "js": js_generator,
    "tv": tv_generator,
    "chi2": chi2_generator,
}


def standardize(gen: FGenerator) -> FGenerator:
    """Return ``(f(u) - f'(1)(u - 1)) / f''(1)``, which has ``f'(1)=0, f''(1)=1``.

    The linear shift leaves the f-divergence unchanged; the rescaling divides
    it by ``f''(1)``.
    """
    d1, d2, d3 = gen.derivatives_at_one()
    if not np.isfinite(d2) or d2 <= 0.0:
        raise DegenerateGeneratorError(f"generator {gen.name} has f''(1) = {d2}")
    f = gen.f

    def g(u):
        u = np.asarray(u, dtype=float)
        return (f(u) - d1 * (u - 1.0)) / d2

    return FGenerator(
        g,
        f"standard {gen.name}",
        0.0,
        1.0,
        d3 / d2,
        (gen.limit_zero + d1) / d2,
        (gen.slope_inf - d1) / d2,
    )


def diamond(gen: FGenerator) -> FGenerator:
    """Conjugate generator ``u f(1/u)``, which swaps the divergence arguments."""
    f = gen.f
    d1, d2, d3 = (gen.fprime1, gen.fsecond1, gen.fthird1)

    def g(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            return u * f(1.0 / u)

    return FGenerator(
        g,
        f"diamond {gen.name}",
        None if d1 is None else -d1,
        d2,
        None if d2 is None or d3 is None else -3.0 * d2 - d3,
        gen.slope_inf,
        gen.limit_zero,
    )


def alpha_of_generator(gen: FGenerator) -> float:
    """``2 f'''(1) + 3`` for a standard generator.

    Non-standard generators are normalized by ``f''(1)`` first, which is the
    same value their standardized version would give.
    """
    _, d2, d3 = gen.derivatives_at_one()
    return 2.0 * d3 / d2 + 3.0


# ---------------------------------------------------------------------------
# discrete distributions


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    probs: np.ndarray

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.probs, dtype=float))
        if p.ndim != 1 or p.size == 0:
            raise DimensionError("a discrete distribution is a non-empty vector")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("probabilities must be finite and nonnegative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "probs", p)

    def __len__(self):
        return self.probs.size

    @property
    def positive(self) -> bool:
        return bool(np.all(self.probs > 0))


def _probs(p) -> np.ndarray:
    if isinstance(p, DiscreteDistribution):
        return p.probs
    return DiscreteDistribution(p).probs


def f_divergence_discrete(gen: FGenerator, p, q, strict: bool = False) -> float:
    """``sum_i p_i f(q_i / p_i)``.

    Zero entries follow the limit conventions: ``q_i = 0`` contributes
    ``p_i f(0+)`` and ``p_i = 0`` contributes ``q_i lim f(u)/u``.  An infinite
    contribution yields ``inf``, or :class:`SupportError` when ``strict``.
    """
    p = _probs(p)
    q = _probs(q)
    if p.size != q.size:
        raise DimensionError(f"distributions of sizes {p.size} and {q.size}")
    both = (p > 0) & (q > 0)
    total = float(np.sum(p[both] * gen(q[both] / p[both])))
    only_p = (p > 0) & (q == 0)
    only_q = (p == 0) & (q > 0)
    if only_p.any():
        if np.isinf(gen.limit_zero):
            if strict:
                raise SupportError(f"{gen.name}: q vanishes where p does not")
            return np.inf
        total += float(np.sum(p[only_p])) * gen.limit_zero
    if only_q.any():
        if np.isinf(gen.slope_inf):
            if strict:
                raise SupportError(f"{gen.name}: p vanishes where q does not")
            return np.inf
        total += float(np.sum(q[only_q])) * gen.slope_inf
    return total


UNDERFLOW = 1e-150


def f_divergence_continuous(
    gen: FGenerator,
    p: Callable[[float], float],
    q: Callable[[float], float],
    support: tuple = (-np.inf, np.inf),
    tol: float = 1e-9,
    rel_tol: float = 1e-10,
    heavy_tails: bool = False,
) -> float:
    """``int p(x) f(q(x)/p(x)) dx`` by adaptive quadrature.

    A density that is exactly 0 while the other is below ``UNDERFLOW`` is
    treated as floating-point underflow in a far tail, not as a support
    mismatch: the point contributes 0 instead of a spurious infinity.
    """

    def integrand(x):
        px = p(x)
        qx = q(x)
        if min(px, qx) <= 0.0 and max(px, qx) < UNDERFLOW:
            return 0.0
        if px <= 0.0:
            if qx <= 0.0:
                return 0.0
            return qx * gen.slope_inf
        if qx <= 0.0:
            return px * gen.limit_zero
        return px * float(gen(qx / px))

    return integrate_interval(integrand, support[0], support[1], tol=tol, rel_tol=rel_tol, heavy_tails=heavy_tails)


def kl_discrete(p, q) -> float:
    return f_divergence_discrete(kl_generator(), p, q)


def js_discrete(p, q) -> float:
    return f_divergence_discrete(js_generator(), p, q)


# ---------------------------------------------------------------------------
# coarse graining


def coarse_grain(theta, partition: Sequence[Iterable[int]]) -> DiscreteDistribution:
    """Lump outcome bins: bin ``i`` of the result carries ``sum_{j in A_i} theta_j``.

    ``partition`` lists disjoint, 0-based index sets covering every outcome.
    """
    p = _probs(theta)
    blocks = [sorted(set(int(j) for j in block)) for block in partition]
    seen = [j for block in blocks for j in block]
    if any(len(b) == 0 for b in blocks):
        raise PartitionError("empty block in partition")
    if len(seen) != len(set(seen)):
        raise PartitionError("partition blocks overlap")
    if sorted(seen) != list(range(p.size)):
        raise PartitionError(f"partition does not cover exactly the indices 0..{p.size - 1}")
    out = np.array([p[b].sum() for b in blocks])
    return DiscreteDistribution(out / out.sum())
