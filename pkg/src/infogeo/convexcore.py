"""Convex potentials, their derivatives and Legendre-Fenchel duality.

A :class:`PotentialFunction` bundles a strictly convex smooth function on an
open convex domain with whatever analytic derivatives are known; anything
missing is filled in by central finite differences.  The conjugate potential
is evaluated numerically with a damped Newton solve of ``grad F(theta) = eta``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import ConvergenceError, DimensionError, DomainError

EPS = np.finfo(float).eps
GRAD_STEP = EPS ** (1.0 / 3.0)
HESS_STEP = EPS ** 0.25
# iterates must stay this far inside the open domain
BOUNDARY_MARGIN = 1e-12

Array = np.ndarray


def as_point(x, dim: Optional[int] = None) -> Array:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1:
        raise DimensionError(f"expected a 1-d point, got shape {x.shape}")
    if dim is not None and x.shape[0] != dim:
        raise DimensionError(f"expected dimension {dim}, got {x.shape[0]}")
    return x


# ---------------------------------------------------------------------------
# domains


class Domain:
    """Open convex region.  Subclasses implement :meth:`contains`."""

    dim: int

    def contains(self, x, margin: float = 0.0) -> bool:
        raise NotImplementedError

    def interior_point(self) -> Array:
        raise NotImplementedError

    def check(self, x, what: str = "point") -> Array:
        x = as_point(x, self.dim)
        if not self.contains(x):
            raise DomainError(f"{what} {x.tolist()} is not inside {self!r}")
        return x


@dataclass(frozen=True)
class Box(Domain):
    """Axis-aligned open box; bounds may be infinite (half-lines, R^D)."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        if len(self.lower) != len(self.upper):
            raise DimensionError("lower and upper bounds differ in length")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("empty box")

    @classmethod
    def real(cls, dim: int) -> "Box":
        return cls((-np.inf,) * dim, (np.inf,) * dim)

    @property
    def dim(self) -> int:
        return len(self.lower)

    def contains(self, x, margin: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,) or not np.all(np.isfinite(x)):
            return False
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        return bool(np.all(x > lo + margin) and np.all(x < hi - margin))

    def interior_point(self) -> Array:
        out = np.zeros(self.dim)
        for i, (lo, hi) in enumerate(zip(self.lower, self.upper)):
            if np.isfinite(lo) and np.isfinite(hi):
                out[i] = 0.5 * (lo + hi)
            elif np.isfinite(lo):
                out[i] = lo + 1.0
            elif np.isfinite(hi):
                out[i] = hi - 1.0
        return out


@dataclass(frozen=True)
class Simplex(Domain):
    """Open probability simplex interior {x : x_i > 0, sum x < 1}."""

    dim: int

    def contains(self, x, margin: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,) or not np.all(np.isfinite(x)):
            return False
        return bool(np.all(x > margin) and x.sum() < 1.0 - margin)

    def interior_point(self) -> Array:
        return np.full(self.dim, 1.0 / (self.dim + 1))


@dataclass(frozen=True)
class Region(Domain):
    """Convex region given by a membership predicate.

    Used for gradient ranges that are not boxes, e.g. the Gaussian
    expectation parameters {(m1, m2) : m2 > m1**2}.
    """

    dim: int
    predicate: Callable[[Array], bool] = field(compare=False)
    point: tuple = ()
    label: str = "region"

    def contains(self, x, margin: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,) or not np.all(np.isfinite(x)):
            return False
        return bool(self.predicate(x))

    def interior_point(self) -> Array:
        return np.asarray(self.point, dtype=float)

    def __repr__(self):
        return f"Region({self.label})"


# ---------------------------------------------------------------------------
# finite differences


def _steps(x: Array, base: float, domain: Optional[Domain]) -> Array:
    h = base * np.maximum(1.0, np.abs(x))
    if domain is None:
        return (x + h) - x
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = 1.0
        while not (domain.contains(x + h[i] * e) and domain.contains(x - h[i] * e)):
            h[i] *= 0.5
            if h[i] < 1e-14 * max(1.0, abs(x[i])):
                raise DomainError(f"point {x.tolist()} too close to the domain boundary")
    # snap to steps that are exactly representable around x
    return (x + h) - x


def fd_gradient(f: Callable, x, domain: Optional[Domain] = None, step: float = GRAD_STEP) -> Array:
    """Central-difference gradient of a scalar function."""
    x = as_point(x)
    h = _steps(x, step, domain)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h[i]
        xp, xm = x + e, x - e
        g[i] = (f(xp) - f(xm)) / (xp[i] - xm[i])
    return g


def fd_jacobian(fun: Callable, x, domain: Optional[Domain] = None, step: float = GRAD_STEP) -> Array:
    """Central-difference Jacobian; column j holds d fun / d x_j."""
    x = as_point(x)
    h = _steps(x, step, domain)
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h[j]
        xp, xm = x + e, x - e
        cols.append((np.asarray(fun(xp)) - np.asarray(fun(xm))) / (xp[j] - xm[j]))
    return np.stack(cols, axis=-1)


def fd_hessian(f: Callable, x, domain: Optional[Domain] = None, step: float = HESS_STEP) -> Array:
    """Hessian from function values only (four-point mixed stencil)."""
    x = as_point(x)
    n = x.size
    h = _steps(x, step, domain)
    H = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i] = h[i]
            ej[j] = h[j]
            val = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4.0 * h[i] * h[j])
            H[i, j] = H[j, i] = val
    return H


def symmetrize3(T: Array) -> Array:
    """Average a rank-3 array over all index permutations."""
    perms = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
    return sum(np.transpose(T, p) for p in perms) / 6.0


# ---------------------------------------------------------------------------
# potentials


@dataclass(frozen=True, eq=False)
class PotentialFunction:
    """Strictly convex smooth function on an open convex domain.

    ``gradient``, ``hessian`` and ``third`` are optional analytic
    derivatives.  ``inverse_gradient`` is an optional closed-form map
    ``eta -> theta``; ``dual_domain`` describes the range of the gradient
    (the domain of the conjugate potential).
    """

    dim: int
    domain: Domain
    value: Callable[[Array], float]
    gradient: Optional[Callable[[Array], Array]] = None
    hessian: Optional[Callable[[Array], Array]] = None
    third: Optional[Callable[[Array], Array]] = None
    inverse_gradient: Optional[Callable[[Array], Array]] = None
    dual_domain: Optional[Domain] = None
    reference: Optional[tuple] = None
    name: str = "F"

    def __call__(self, theta) -> float:
        theta = self.domain.check(theta)
        return float(self.value(theta))

    def reference_point(self) -> Array:
        if self.reference is not None:
            return np.asarray(self.reference, dtype=float)
        return self.domain.interior_point()

    def without_closed_forms(self) -> "PotentialFunction":
        """Copy that drops the closed-form inverse gradient (forces Newton)."""
        return PotentialFunction(
            self.dim, self.domain, self.value, self.gradient, self.hessian, self.third,
            None, self.dual_domain, self.reference, self.name,
        )


def grad(F: PotentialFunction, theta) -> Array:
    theta = F.domain.check(theta)
    if F.gradient is not None:
        return np.asarray(F.gradient(theta), dtype=float).reshape(F.dim)
    return fd_gradient(F.value, theta, F.domain)


def hessian(F: PotentialFunction, theta) -> Array:
    theta = F.domain.check(theta)
    if F.hessian is not None:
        return np.asarray(F.hessian(theta), dtype=float).reshape(F.dim, F.dim)
    if F.gradient is not None:
        J = fd_jacobian(lambda t: np.asarray(F.gradient(t), dtype=float).reshape(F.dim), theta, F.domain)
        return 0.5 * (J + J.T)
    return fd_hessian(F.value, theta, F.domain)


def cubic_tensor(F: PotentialFunction, theta) -> Array:
    """Totally symmetric third-derivative tensor of the potential."""
    theta = F.domain.check(theta)
    if F.third is not None:
        T = np.asarray(F.third(theta), dtype=float).reshape(F.dim, F.dim, F.dim)
    else:
        h = _steps(theta, HESS_STEP, F.domain)
        T = np.empty((F.dim,) * 3)
        for k in range(F.dim):
            e = np.zeros(F.dim)
            e[k] = h[k]
            T[:, :, k] = (hessian(F, theta + e) - hessian(F, theta - e)) / (2.0 * h[k])
    return symmetrize3(T)


theta_to_eta = grad


# ---------------------------------------------------------------------------
# Newton engine


class NewtonResult(NamedTuple):
    x: Array
    residual: float
    iterations: int
    multipliers: Optional[Array]


def damped_newton(
    objective: Callable[[Array], float],
    gradient: Callable[[Array], Array],
    hessian_fn: Callable[[Array], Array],
    x0,
    domain: Domain,
    tol: float = 1e-10,
    max_iter: int = 200,
    A: Optional[Array] = None,
) -> NewtonResult:
    """Minimize a smooth convex objective, optionally subject to ``A x = const``.

    ``x0`` must be feasible.  The residual is the sup-norm of the gradient
    (projected onto the null space of ``A`` when constraints are present).
    Steps are halved until the objective decreases (or the residual shrinks,
    which rescues steps lost to round-off near the optimum) and the iterate
    stays inside the domain.
    """
    x = as_point(x0).copy()
    if not domain.contains(x, BOUNDARY_MARGIN):
        raise DomainError(f"Newton start {x.tolist()} is not inside the domain")
    n = x.size
    c = 0 if A is None else A.shape[0]

    def kkt(x):
        g = np.asarray(gradient(x), dtype=float)
        H = np.asarray(hessian_fn(x), dtype=float)
        if c == 0:
            return g, H, g, None
        lam, *_ = np.linalg.lstsq(A.T, g, rcond=None)
        return g, H, g - A.T @ lam, lam

    g, H, r, lam = kkt(x)
    res = float(np.max(np.abs(r)))
    f = objective(x)
    polished = False
    for it in range(max_iter):
        if res <= tol and polished:
            return NewtonResult(x, res, it, lam)
        if c == 0:
            try:
                d = -np.linalg.solve(H, g)
            except np.linalg.LinAlgError:
                d = -np.linalg.lstsq(H, g, rcond=None)[0]
        else:
            K = np.block([[H, A.T], [A, np.zeros((c, c))]])
            rhs = np.concatenate([-g, np.zeros(c)])
            try:
                sol = np.linalg.solve(K, rhs)
            except np.linalg.LinAlgError:
                sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
            d = sol[:n]
        slope = float(g @ d)
        t = 1.0
        accepted = False
        while t > 1e-20:
            xn = x + t * d
            if domain.contains(xn, BOUNDARY_MARGIN):
                fn = objective(xn)
                if np.isfinite(fn):
                    gn, Hn, rn, lamn = kkt(xn)
                    resn = float(np.max(np.abs(rn)))
                    if fn <= f + 1e-4 * t * slope or resn < res:
                        accepted = True
                        break
            t *= 0.5
        if not accepted:
            if res <= tol:
                return NewtonResult(x, res, it, lam)
            raise ConvergenceError(f"line search collapsed at {x.tolist()} (residual {res:.3g})")
        if res <= tol:
            # one polishing step taken; stop if it did not help
            polished = True
            if resn >= res:
                return NewtonResult(x, res, it + 1, lam)
        x, f, g, H, r, lam, res = xn, fn, gn, Hn, rn, lamn, resn
        if np.max(np.abs(x)) > 1e12:
            raise DomainError("Newton iterates diverge: target outside the gradient range")
    if res <= tol:
        return NewtonResult(x, res, max_iter, lam)
    raise ConvergenceError(f"no convergence after {max_iter} Newton iterations (residual {res:.3g})")


# ---------------------------------------------------------------------------
# conjugation


class Conjugate(NamedTuple):
    value: float
    theta: Array


def legendre_conjugate(F: PotentialFunction, eta, tol: float = 1e-10, start=None) -> Conjugate:
    """Evaluate ``F*(eta) = sup_theta <theta, eta> - F(theta)`` by damped Newton.

    Returns the value and the maximizer ``theta = grad F*(eta)``.
    """
    eta = as_point(eta, F.dim)
    if F.dual_domain is not None and not F.dual_domain.contains(eta):
        raise DomainError(f"eta {eta.tolist()} is outside the gradient range of {F.name}")
    x0 = F.reference_point() if start is None else as_point(start, F.dim)
    res = damped_newton(
        lambda t: float(F.value(t)) - float(t @ eta),
        lambda t: grad(F, t) - eta,
        lambda t: hessian(F, t),
        x0,
        F.domain,
        tol=tol,
    )
    theta = res.x
    return Conjugate(float(theta @ eta) - float(F.value(theta)), theta)


def eta_to_theta(F: PotentialFunction, eta) -> Array:
    """Inverse of the gradient map: closed form when known, else Newton."""
    eta = as_point(eta, F.dim)
    if F.inverse_gradient is not None:
        if F.dual_domain is not None and not F.dual_domain.contains(eta):
            raise DomainError(f"eta {eta.tolist()} is outside the gradient range of {F.name}")
        return np.asarray(F.inverse_gradient(eta), dtype=float).reshape(F.dim)
    return legendre_conjugate(F, eta).theta


CONJUGATE_CACHE = 64


def conjugate(F: PotentialFunction) -> PotentialFunction:
    """Numeric conjugate potential ``F*`` as a :class:`PotentialFunction`.

    Its gradient is the inverse gradient map of ``F`` and its Hessian the
    inverse Hessian of ``F`` at the matching natural point.
    """
    if F.dual_domain is not None:
        dom = F.dual_domain
    else:
        def _in_range(eta):
            try:
                eta_to_theta(F, eta)
            except (DomainError, ConvergenceError):
                return False
            return True
        dom = Region(F.dim, _in_range, tuple(grad(F, F.reference_point())), f"range of grad {F.name}")

    # value, gradient and Hessian at one eta share a single inner solve;
    # successive solves start from the previous maximizer
    cache: dict = {}
    last = [None]

    def theta_of(eta):
        eta = as_point(eta, F.dim)
        key = eta.tobytes()
        if key not in cache:
            if F.inverse_gradient is not None:
                theta = eta_to_theta(F, eta)
            else:
                try:
                    theta = legendre_conjugate(F, eta, start=last[0]).theta
                except (DomainError, ConvergenceError):
                    if last[0] is None:
                        raise
                    theta = legendre_conjugate(F, eta).theta
            if len(cache) >= CONJUGATE_CACHE:
                cache.clear()
            cache[key] = theta
            last[0] = theta
        return cache[key].copy()

    def value(eta):
        theta = theta_of(eta)
        return float(theta @ eta) - float(F.value(theta))

    def hess(eta):
        return np.linalg.inv(hessian(F, theta_of(eta)))

    return PotentialFunction(
        dim=F.dim,
        domain=dom,
        value=value,
        gradient=theta_of,
        hessian=hess,
        inverse_gradient=(lambda theta: grad(F, theta)),
        dual_domain=F.domain,
        reference=tuple(grad(F, F.reference_point())),
        name=f"{F.name}*",
    )


def crouzeix_residual(F: PotentialFunction, theta) -> float:
    """Sup-norm of ``hess F(theta) @ hess F*(eta) - I`` with ``eta = grad F(theta)``.

    The dual Hessian is the finite-difference Jacobian of :func:`eta_to_theta`.
    """
    theta = F.domain.check(theta)
    eta = grad(F, theta)
    J = fd_jacobian(lambda e: eta_to_theta(F, e), eta, F.dual_domain)
    return float(np.max(np.abs(hessian(F, theta) @ J - np.eye(F.dim))))


# ---------------------------------------------------------------------------
# quadratic forms


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """Fixed symmetric positive-definite metric on a vector space."""

    matrix: Array

    def __post_init__(self):
        G = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if G.shape[0] != G.shape[1]:
            raise DimensionError(f"metric must be square, got {G.shape}")
        if not np.allclose(G, G.T, rtol=0, atol=1e-12 * max(1.0, np.abs(G).max())):
            raise ValueError("metric matrix is not symmetric")
        try:
            np.linalg.cholesky(G)
        except np.linalg.LinAlgError:
            raise ValueError("metric matrix is not positive-definite") from None
        object.__setattr__(self, "matrix", G)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def mahalanobis(Q: QuadraticForm, u, v) -> float:
    u = as_point(u)
    v = as_point(v)
    if u.size != Q.dim or v.size != Q.dim:
        raise DimensionError(f"vectors of size {u.size}, {v.size} for a {Q.dim}-d metric")
    d = u - v
    return float(np.sqrt(max(d @ Q.matrix @ d, 0.0)))


# ---------------------------------------------------------------------------
# built-in potentials


def quadratic_potential(dim: int) -> PotentialFunction:
    """``F(theta) = |theta|^2 / 2``, the self-dual Euclidean potential."""
    return PotentialFunction(
        dim=dim,
        domain=Box.real(dim),
        value=lambda t: 0.5 * float(t @ t),
        gradient=lambda t: np.array(t, dtype=float),
        hessian=lambda t: np.eye(dim),
        third=lambda t: np.zeros((dim, dim, dim)),
        inverse_gradient=lambda e: np.array(e, dtype=float),
        dual_domain=Box.real(dim),
        name="half squared norm",
    )


def negative_entropy_potential(dim: int) -> PotentialFunction:
    """``F(theta) = sum theta_i log theta_i`` on the positive orthant (extended KL)."""

    def third(t):
        T = np.zeros((dim, dim, dim))
        T[np.arange(dim), np.arange(dim), np.arange(dim)] = -1.0 / t**2
        return T

    return PotentialFunction(
        dim=dim,
        domain=Box((0.0,) * dim, (np.inf,) * dim),
        value=lambda t: float(np.sum(t * np.log(t))),
        gradient=lambda t: np.log(t) + 1.0,
        hessian=lambda t: np.diag(1.0 / t),
        third=third,
        inverse_gradient=lambda e: np.exp(np.asarray(e) - 1.0),
        dual_domain=Box.real(dim),
        reference=(1.0,) * dim,
        name="negative entropy",
    )


def _sigmoid(t):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(t, dtype=float)))


def bernoulli_potential() -> PotentialFunction:
    """Bernoulli cumulant ``log(1 + e^theta)``."""

    def third(t):
        s = _sigmoid(t[0])
        return np.array([[[s * (1 - s) * (1 - 2 * s)]]])

    return PotentialFunction(
        dim=1,
        domain=Box.real(1),
        value=lambda t: float(np.logaddexp(0.0, t[0])),
        gradient=lambda t: np.array([_sigmoid(t[0])]),
        hessian=lambda t: np.array([[_sigmoid(t[0]) * (1 - _sigmoid(t[0]))]]),
        third=third,
        inverse_gradient=lambda e: np.log(e) - np.log1p(-e),
        dual_domain=Box((0.0,), (1.0,)),
        name="bernoulli cumulant",
    )


def poisson_potential() -> PotentialFunction:
    """Poisson cumulant ``e^theta``."""
    return PotentialFunction(
        dim=1,
        domain=Box.real(1),
        value=lambda t: float(np.exp(t[0])),
        gradient=lambda t: np.exp(t),
        hessian=lambda t: np.array([[np.exp(t[0])]]),
        third=lambda t: np.array([[[np.exp(t[0])]]]),
        inverse_gradient=lambda e: np.log(e),
        dual_domain=Box((0.0,), (np.inf,)),
        name="poisson cumulant",
    )


def gaussian_location_potential(sigma: float = 1.0) -> PotentialFunction:
    """Cumulant ``theta^2 / (2 sigma^2)`` of the fixed-variance location family."""
    s2 = float(sigma) ** 2
    return PotentialFunction(
        dim=1,
        domain=Box.real(1),
        value=lambda t: float(t[0] ** 2 / (2 * s2)),
        gradient=lambda t: np.asarray(t, dtype=float) / s2,
        hessian=lambda t: np.array([[1.0 / s2]]),
        third=lambda t: np.zeros((1, 1, 1)),
        inverse_gradient=lambda e: np.asarray(e, dtype=float) * s2,
        dual_domain=Box.real(1),
        name=f"gaussian location cumulant (sigma={sigma:g})",
    )


def gaussian_potential() -> PotentialFunction:
    """Univariate Gaussian cumulant in natural coordinates (mu/s2, -1/(2 s2))."""

    def value(t):
        return float(-t[0] ** 2 / (4 * t[1]) - 0.5 * np.log(-2 * t[1]))

    def gradient(t):
        return np.array([-t[0] / (2 * t[1]), t[0] ** 2 / (4 * t[1] ** 2) - 1 / (2 * t[1])])

    def hess(t):
        a, b = t
        return np.array([
            [-1 / (2 * b), a / (2 * b**2)],
            [a / (2 * b**2), -(a**2) / (2 * b**3) + 1 / (2 * b**2)],
        ])

    def third(t):
        a, b = t
        T = np.empty((2, 2, 2))
        T[0, 0, 0] = 0.0
        T[0, 0, 1] = T[0, 1, 0] = T[1, 0, 0] = 1 / (2 * b**2)
        T[0, 1, 1] = T[1, 0, 1] = T[1, 1, 0] = -a / b**3
        T[1, 1, 1] = 3 * a**2 / (2 * b**4) - 1 / b**3
        return T

    def inverse(e):
        var = e[1] - e[0] ** 2
        return np.array([e[0] / var, -1 / (2 * var)])

    return PotentialFunction(
        dim=2,
        domain=Box((-np.inf, -np.inf), (np.inf, 0.0)),
        value=value,
        gradient=gradient,
        hessian=hess,
        third=third,
        inverse_gradient=inverse,
        dual_domain=Region(2, lambda e: e[1] - e[0] ** 2 > 0, (0.0, 1.0), "m2 > m1^2"),
        reference=(0.0, -0.5),
        name="gaussian cumulant",
    )


def exponential_potential() -> PotentialFunction:
    """Exponential-distribution cumulant ``-log(-theta)``, theta = -rate."""
    return PotentialFunction(
        dim=1,
        domain=Box((-np.inf,), (0.0,)),
        value=lambda t: float(-np.log(-t[0])),
        gradient=lambda t: -1.0 / np.asarray(t, dtype=float),
        hessian=lambda t: np.array([[1.0 / t[0] ** 2]]),
        third=lambda t: np.array([[[-2.0 / t[0] ** 3]]]),
        inverse_gradient=lambda e: -1.0 / np.asarray(e, dtype=float),
        dual_domain=Box((0.0,), (np.inf,)),
        name="exponential cumulant",
    )


def categorical_potential(k: int) -> PotentialFunction:
    """Cumulant ``log(1 + sum e^theta_i)`` of a k-outcome categorical (D = k - 1)."""
    if k < 2:
        raise ValueError("categorical family needs at least two outcomes")
    D = k - 1

    def probs(t):
        z = np.concatenate([t, [0.0]])
        z = z - z.max()
        w = np.exp(z)
        return w[:-1] / w.sum()

    def value(t):
        z = np.concatenate([t, [0.0]])
        m = z.max()
        return float(m + np.log(np.sum(np.exp(z - m))))

    def hess(t):
        p = probs(t)
        return np.diag(p) - np.outer(p, p)

    def third(t):
        p = probs(t)
        I = np.eye(D)
        dp = p[:, None] * (I - p[None, :])  # dp[i, k] = d p_i / d theta_k
        T = np.einsum("ij,ik->ijk", I, dp) - np.einsum("ik,j->ijk", dp, p) - np.einsum("i,jk->ijk", p, dp)
        return T

    def inverse(e):
        last = 1.0 - np.sum(e)
        return np.log(e) - np.log(last)

    return PotentialFunction(
        dim=D,
        domain=Box.real(D),
        value=value,
        gradient=probs,
        hessian=hess,
        third=third,
        inverse_gradient=inverse,
        dual_domain=Simplex(D),
        name=f"categorical({k}) cumulant",
    )


def product_potential(F: PotentialFunction, copies: int) -> PotentialFunction:
    """Potential of ``copies`` independent one-dimensional models, ``sum_i F(theta_i)``."""
    if F.dim != 1:
        raise DimensionError("product_potential takes a one-dimensional potential")
    if not isinstance(F.domain, Box):
        raise TypeError("product_potential needs a box domain")
    n = int(copies)

    def value(t):
        return float(sum(F.value(t[i:i + 1]) for i in range(n)))

    def gradient(t):
        return np.array([grad(F, t[i:i + 1])[0] for i in range(n)])

    def hess(t):
        return np.diag([hessian(F, t[i:i + 1])[0, 0] for i in range(n)])

    def third(t):
        T = np.zeros((n, n, n))
        for i in range(n):
            T[i, i, i] = cubic_tensor(F, t[i:i + 1])[0, 0, 0]
        return T

    inverse = None
    if F.inverse_gradient is not None:
        def inverse(e):
            return np.array([F.inverse_gradient(e[i:i + 1])[0] for i in range(n)])

    dual = None
    if isinstance(F.dual_domain, Box):
        dual = Box(F.dual_domain.lower * n, F.dual_domain.upper * n)
    ref = None if F.reference is None else tuple(F.reference) * n
    return PotentialFunction(
        n, Box(F.domain.lower * n, F.domain.upper * n), value, gradient, hess, third,
        inverse, dual, ref, f"{F.name} x{n}",
    )
