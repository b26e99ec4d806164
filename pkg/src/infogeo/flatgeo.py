"""Dually flat manifold machinery: geodesics, bisectors and flat projections.

Points are carried by their natural coordinates ``theta``.  The divergence is
the Bregman divergence of the potential, ``D(theta1 : theta2) = B_F(theta1 : theta2)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import linprog

from . import convexcore as cc
from .convexcore import BOUNDARY_MARGIN, Box, Domain, PotentialFunction, Simplex, as_point, damped_newton
from .divergences import bregman
from .errors import ConvergenceError, DimensionError, InfeasibleError

PROJECTION_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DuallyFlatManifold:
    F: PotentialFunction
    F_star: PotentialFunction = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "F_star", cc.conjugate(self.F))

    @property
    def dim(self) -> int:
        return self.F.dim

    def theta_to_eta(self, theta) -> np.ndarray:
        return cc.grad(self.F, theta)

    def eta_to_theta(self, eta) -> np.ndarray:
        return cc.eta_to_theta(self.F, eta)

    def divergence(self, theta1, theta2) -> float:
        return bregman(self.F, theta1, theta2)

    def primal_geodesic(self, theta_p, theta_q) -> "GeodesicSegment":
        return GeodesicSegment(self, "primal", as_point(theta_p), as_point(theta_q))

    def dual_geodesic(self, theta_p, theta_q) -> "GeodesicSegment":
        return GeodesicSegment(self, "dual", as_point(theta_p), as_point(theta_q))


@dataclass(frozen=True, eq=False)
class AffineSubmanifold:
    """``{p : A coords(p) = b}`` with coords the theta (primal) or eta (dual) chart."""

    chart: str
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        if self.chart not in ("theta", "eta"):
            raise ValueError("chart must be 'theta' or 'eta'")
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if A.shape[0] != b.size:
            raise DimensionError(f"constraint matrix has {A.shape[0]} rows but b has {b.size} entries")
        if A.shape[0] >= A.shape[1]:
            raise DimensionError("an affine submanifold needs fewer constraints than the dimension")
        if np.linalg.matrix_rank(A) != A.shape[0]:
            raise DimensionError("constraint matrix must have full row rank")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def residual(self, coords) -> float:
        return float(np.max(np.abs(self.A @ coords - self.b)))


@dataclass(frozen=True, eq=False)
class GeodesicSegment:
    """Straight segment in theta (primal) or eta (dual) coordinates; ``point`` returns theta."""

    manifold: DuallyFlatManifold
    kind: str
    P: np.ndarray
    Q: np.ndarray

    def coords(self, t: float) -> np.ndarray:
        if self.kind == "primal":
            a, b = self.P, self.Q
        else:
            a, b = self.manifold.theta_to_eta(self.P), self.manifold.theta_to_eta(self.Q)
        return (1.0 - t) * a + t * b

    def point(self, t: float) -> np.ndarray:
        c = self.coords(t)
        return c if self.kind == "primal" else self.manifold.eta_to_theta(c)


def m_bisector_value(mfd: DuallyFlatManifold, theta1, theta2, theta_p) -> float:
    """``F(theta1) - F(theta2) + <eta(P), theta2 - theta1>``.

    Equals ``B_F(theta1 : theta_P) - B_F(theta2 : theta_P)``, so it vanishes
    exactly on the points Bregman-equidistant from ``theta1`` and ``theta2``.
    """
    F = mfd.F
    theta1 = F.domain.check(theta1)
    theta2 = F.domain.check(theta2)
    eta_p = mfd.theta_to_eta(theta_p)
    return float(F.value(theta1)) - float(F.value(theta2)) + float(eta_p @ (theta2 - theta1))


# ---------------------------------------------------------------------------
# projections


def _interior_lp(domain: Domain, A: np.ndarray, b: np.ndarray) -> Optional[np.ndarray]:
    """Point of ``{A x = b}`` deepest inside a box or simplex, via a linear program."""
    n = A.shape[1]
    # variables (x, s); maximize s
    c = np.zeros(n + 1)
    c[-1] = -1.0
    rows, rhs = [], []
    if isinstance(domain, Box):
        for i, (lo, hi) in enumerate(zip(domain.lower, domain.upper)):
            if np.isfinite(lo):
                r = np.zeros(n + 1)
                r[i], r[-1] = -1.0, 1.0
                rows.append(r)
                rhs.append(-lo)
            if np.isfinite(hi):
                r = np.zeros(n + 1)
                r[i], r[-1] = 1.0, 1.0
                rows.append(r)
                rhs.append(hi)
    elif isinstance(domain, Simplex):
        for i in range(n):
            r = np.zeros(n + 1)
            r[i], r[-1] = -1.0, 1.0
            rows.append(r)
            rhs.append(0.0)
        r = np.ones(n + 1)
        rows.append(r)
        rhs.append(1.0)
    else:
        return None
    A_eq = np.hstack([A, np.zeros((A.shape[0], 1))])
    bounds = [(None, None)] * n + [(None, 1.0)]
    res = linprog(c, A_ub=np.array(rows) if rows else None, b_ub=np.array(rhs) if rhs else None,
                  A_eq=A_eq, b_eq=b, bounds=bounds, method="highs")
    if res.status != 0 or res.x[-1] <= 10 * BOUNDARY_MARGIN:
        return None
    return res.x[:n]


def feasible_start(domain: Domain, S: AffineSubmanifold, hint) -> np.ndarray:
    """Interior point of the domain satisfying the affine constraint.

    Tries the least-squares correction of ``hint`` onto the constraint, then
    of the domain's reference point, then a linear program.
    """
    A, b = S.A, S.b
    pinv = np.linalg.pinv(A)
    for h in (as_point(hint), domain.interior_point()):
        x = h - pinv @ (A @ h - b)
        if domain.contains(x, BOUNDARY_MARGIN):
            return x
    x = _interior_lp(domain, A, b)
    if x is None or not domain.contains(x, BOUNDARY_MARGIN):
        raise InfeasibleError("the affine constraint does not meet the domain interior")
    # tidy the LP solution back onto the constraint
    return x - pinv @ (A @ x - b)


def _minimize_on_affine(G: PotentialFunction, target: np.ndarray, S: AffineSubmanifold, hint) -> np.ndarray:
    """argmin over ``{A x = b}`` of ``G(x) - <x, target>``, i.e. of ``B_G(x : grad G^{-1}(target))``."""
    x0 = feasible_start(G.domain, S, hint)
    res = damped_newton(
        lambda x: float(G.value(x)) - float(x @ target),
        lambda x: cc.grad(G, x) - target,
        lambda x: cc.hessian(G, x),
        x0,
        G.domain,
        tol=PROJECTION_TOL,
        A=S.A,
    )
    return res.x


def project_dual(mfd: DuallyFlatManifold, theta_p, S: AffineSubmanifold) -> np.ndarray:
    """Point of the theta-affine ``S`` minimizing ``B_F(theta_Q : theta_P)``."""
    if S.chart != "theta":
        raise ValueError("project_dual needs a submanifold expressed in the theta chart")
    theta_p = mfd.F.domain.check(theta_p)
    return _minimize_on_affine(mfd.F, mfd.theta_to_eta(theta_p), S, theta_p)


def project_primal(mfd: DuallyFlatManifold, theta_p, S: AffineSubmanifold) -> np.ndarray:
    """Point of the eta-affine ``S`` minimizing ``B_F(theta_P : theta_Q)``.

    Solved in eta coordinates, where the objective ``B_{F*}(eta_Q : eta_P)``
    is convex; returns theta of the minimizer.
    """
    if S.chart != "eta":
        raise ValueError("project_primal needs a submanifold expressed in the eta chart")
    theta_p = mfd.F.domain.check(theta_p)
    eta_p = mfd.theta_to_eta(theta_p)
    eta_q = _minimize_on_affine(mfd.F_star, theta_p, S, eta_p)
    return mfd.eta_to_theta(eta_q)


# ---------------------------------------------------------------------------
# Pythagoras


def pythagoras_residuals(mfd: DuallyFlatManifold, theta_p, theta_q, theta_r, check: bool = True,
                         zero_tol: float = 1e-10, additivity_tol: float = 1e-8) -> tuple[float, float]:
    """Orthogonality residuals of the triangle P, Q, R at Q.

    Returns ``(<eta_P - eta_Q, theta_Q - theta_R>, <theta_P - theta_Q, eta_Q - eta_R>)``.
    The first vanishes iff ``B(R:P) = B(R:Q) + B(Q:P)``, the second iff
    ``B(P:R) = B(P:Q) + B(Q:R)``; with ``check`` the matching additivity is
    verified whenever a residual is zero.
    """
    tp, tq, tr = (mfd.F.domain.check(t) for t in (theta_p, theta_q, theta_r))
    ep, eq, er = (mfd.theta_to_eta(t) for t in (tp, tq, tr))
    first = float((ep - eq) @ (tq - tr))
    second = float((tp - tq) @ (eq - er))
    if check:
        D = mfd.divergence
        if abs(first) <= zero_tol:
            gap = D(tr, tp) - D(tr, tq) - D(tq, tp)
            if abs(gap) > additivity_tol * max(1.0, D(tr, tp)):
                raise AssertionError(f"Pythagorean additivity fails by {gap:.3g} at zero residual")
        if abs(second) <= zero_tol:
            gap = D(tp, tr) - D(tp, tq) - D(tq, tr)
            if abs(gap) > additivity_tol * max(1.0, D(tp, tr)):
                raise AssertionError(f"Pythagorean additivity fails by {gap:.3g} at zero residual")
    return first, second


def pythagoras_gaps(mfd: DuallyFlatManifold, theta_p, theta_q, theta_r) -> tuple[float, float]:
    """``(B(R:P) - B(R:Q) - B(Q:P), B(P:R) - B(P:Q) - B(Q:R))``."""
    D = mfd.divergence
    return (D(theta_r, theta_p) - D(theta_r, theta_q) - D(theta_q, theta_p),
            D(theta_p, theta_r) - D(theta_p, theta_q) - D(theta_q, theta_r))


# ---------------------------------------------------------------------------
# alternating projections


class SetDivergence(NamedTuple):
    value: float
    theta_s: np.ndarray
    theta_s_prime: np.ndarray
    history: list


def set_divergence(mfd: DuallyFlatManifold, S: AffineSubmanifold, S_prime: AffineSubmanifold,
                   tol: float = 1e-10, max_iter: int = 500, full: bool = False):
    """``min B_F(s : s')`` over ``s`` in the theta-affine ``S`` and ``s'`` in the eta-affine ``S'``.

    Alternates the two flat projections from a feasible point of ``S'``.  The
    divergence sequence is non-increasing; this is checked on every step.
    """
    if S.chart != "theta" or S_prime.chart != "eta":
        raise ValueError("S must be theta-affine and S' eta-affine")
    eta0 = feasible_start(mfd.F_star.domain, S_prime, mfd.theta_to_eta(mfd.F.reference_point()))
    s_prime = mfd.eta_to_theta(eta0)
    s = project_dual(mfd, s_prime, S)
    value = mfd.divergence(s, s_prime)
    history = [value]
    for _ in range(max_iter):
        s_prime = project_primal(mfd, s, S_prime)
        mid = mfd.divergence(s, s_prime)
        s = project_dual(mfd, s_prime, S)
        new = mfd.divergence(s, s_prime)
        slack = 1e-12 * max(1.0, value)
        if mid > value + slack or new > mid + slack:
            raise AssertionError("alternating projections increased the divergence")
        history.append(new)
        done = value - new < tol
        value = new
        if done:
            break
    else:
        raise ConvergenceError(f"alternating projections did not settle in {max_iter} rounds")
    if full:
        return SetDivergence(value, s, s_prime, history)
    return value
