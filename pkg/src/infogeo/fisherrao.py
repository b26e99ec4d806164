"""Fisher information, expected connections and Fisher-Rao distances.

Monte-Carlo estimators take a statistical model exposing ``sample``,
``log_density``, ``score`` and ``log_density_hessian`` (both
:class:`~infogeo.expfam.ExponentialFamily` and
:class:`~infogeo.mixfam.MixtureFamily` do) and report entrywise standard
errors from the per-sample spread.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from . import convexcore as cc
from .convexcore import GRAD_STEP, HESS_STEP, as_point
from .errors import ConvergenceError, InfoGeoError, SingularMetricError, SupportError


@dataclass(frozen=True)
class FIMEstimate:
    matrix: np.ndarray
    stderr: np.ndarray
    n: int
    method: str


@dataclass(frozen=True)
class TensorEstimate:
    """Monte-Carlo estimate of a rank-3 tensor with entrywise standard errors."""

    value: np.ndarray
    stderr: np.ndarray
    n: int


@dataclass(frozen=True)
class ConnectionEstimate:
    """Lowered Christoffel symbols ``gamma[i, j, k] = Gamma_{ij,k}``."""

    gamma: np.ndarray
    stderr: np.ndarray
    alpha: float


def _mean_se(terms: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = terms.shape[0]
    return terms.mean(axis=0), terms.std(axis=0, ddof=1) / np.sqrt(n)


def _draw(fam, theta, n, seed):
    return fam.sample(theta, int(n), seed)


# ---------------------------------------------------------------------------
# alpha representations


@dataclass(frozen=True)
class AlphaRepresentation:
    """Density embedding ``k_alpha``: ``log u`` for alpha = 1, else ``2/(1-alpha) u^((1-alpha)/2)``."""

    alpha: float

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.alpha == 1.0:
            return np.log(u)
        return 2.0 / (1.0 - self.alpha) * np.power(u, 0.5 * (1.0 - self.alpha))


def alpha_likelihood_gradient(fam, theta, x, alpha: float) -> np.ndarray:
    """Central-difference gradient in theta of ``k_alpha(p(x; theta))``, shape ``(n, D)``."""
    theta = as_point(theta)
    k = AlphaRepresentation(alpha)
    x = np.atleast_1d(x)
    h = GRAD_STEP * np.maximum(1.0, np.abs(theta))
    out = np.empty((x.shape[0], theta.size))
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = h[i]
        plus = k(np.exp(fam.log_density(theta + e, x)))
        minus = k(np.exp(fam.log_density(theta - e, x)))
        out[:, i] = (plus - minus) / (2 * h[i])
    return out


# ---------------------------------------------------------------------------
# FIM estimators


def fim_score_outer(fam, theta, n: int = 100_000, seed=0) -> FIMEstimate:
    """Mean outer product of the score."""
    x = _draw(fam, theta, n, seed)
    s = fam.score(theta, x)
    m, se = _mean_se(np.einsum("ni,nj->nij", s, s))
    return FIMEstimate(m, se, int(n), "score_outer")


def score_mean(fam, theta, n: int = 100_000, seed=0) -> tuple[np.ndarray, np.ndarray]:
    """Mean score and its standard error; zero in expectation for regular models."""
    x = _draw(fam, theta, n, seed)
    return _mean_se(fam.score(theta, x))


def fim_neg_hessian(fam, theta, n: int = 100_000, seed=0) -> FIMEstimate:
    """Negative mean Hessian of the log-likelihood."""
    x = _draw(fam, theta, n, seed)
    H = np.asarray(fam.log_density_hessian(theta, x))
    m, se = _mean_se(-H)
    return FIMEstimate(m, se, int(n), "neg_hessian")


def fim_alpha(fam, theta, alpha: float, n: int = 100_000, seed=0) -> FIMEstimate:
    """``I^alpha_ij = int d_i l^alpha d_j l^-alpha``, importance-weighted by ``p``."""
    theta = as_point(theta)
    x = _draw(fam, theta, n, seed)
    p = np.exp(fam.log_density(theta, x))
    ga = alpha_likelihood_gradient(fam, theta, x, alpha)
    gb = alpha_likelihood_gradient(fam, theta, x, -alpha)
    terms = np.einsum("ni,nj->nij", ga, gb) / p[:, None, None]
    terms = 0.5 * (terms + np.swapaxes(terms, 1, 2))
    m, se = _mean_se(terms)
    return FIMEstimate(m, se, int(n), f"alpha_rep({alpha:g})")


def fim_sqrt(fam, theta, n: int = 100_000, seed=0) -> FIMEstimate:
    """Square-root representation ``4 int d_i sqrt(p) d_j sqrt(p)``."""
    theta = as_point(theta)
    x = _draw(fam, theta, n, seed)
    p = np.exp(fam.log_density(theta, x))
    # k_0(u) = 2 sqrt(u), so half its gradient is d sqrt(p)
    g = 0.5 * alpha_likelihood_gradient(fam, theta, x, 0.0)
    terms = 4.0 * np.einsum("ni,nj->nij", g, g) / p[:, None, None]
    m, se = _mean_se(terms)
    return FIMEstimate(m, se, int(n), "sqrt_rep")


# ---------------------------------------------------------------------------
# cubic tensors and connections


def skewness_tensor(fam, theta, n: int = 100_000, seed=0) -> TensorEstimate:
    """Amari-Chentsov tensor ``E[d_i l d_j l d_k l]``."""
    if n < 1000:
        raise ValueError("skewness estimation needs at least 1000 samples")
    x = _draw(fam, theta, n, seed)
    s = fam.score(theta, x)
    m, se = _mean_se(np.einsum("ni,nj,nk->nijk", s, s, s))
    return TensorEstimate(m, se, int(n))


def expected_alpha_christoffels(fam, theta, alpha, n: int = 100_000, seed=0):
    """``E[(d_i d_j l + (1-alpha)/2 d_i l d_j l) d_k l]`` on one shared sample.

    ``alpha`` may be a scalar or a sequence; a sequence returns a dict keyed
    by alpha, all estimates computed from the same draws so that linear
    identities in alpha hold to round-off.
    """
    if n < 1000:
        raise ValueError("connection estimation needs at least 1000 samples")
    x = _draw(fam, theta, n, seed)
    s = fam.score(theta, x)
    H = np.asarray(fam.log_density_hessian(theta, x))
    A = np.einsum("nij,nk->nijk", H, s)
    C = np.einsum("ni,nj,nk->nijk", s, s, s)
    alphas = np.atleast_1d(np.asarray(alpha, dtype=float))
    out = {}
    for a in alphas:
        m, se = _mean_se(A + 0.5 * (1.0 - a) * C)
        out[float(a)] = ConnectionEstimate(m, se, float(a))
    if np.ndim(alpha) == 0:
        return out[float(alpha)]
    return out


def levi_civita_symbols(metric_field: Callable[[np.ndarray], np.ndarray], theta, domain=None):
    """Christoffel symbols of the Levi-Civita connection of a metric field.

    Returns ``(upper, lower)`` with ``upper[i, j, k] = Gamma^k_{ij}`` and
    ``lower[i, j, k] = Gamma_{ij,k} = (d_i g_jk + d_j g_ik - d_k g_ij) / 2``;
    metric derivatives by central differences.
    """
    theta = as_point(theta)
    g = np.asarray(metric_field(theta), dtype=float)
    if np.linalg.cond(g) > 1e12:
        raise SingularMetricError(f"metric is singular at {theta.tolist()}")
    dg = cc.fd_jacobian(lambda t: np.asarray(metric_field(t), dtype=float), theta, domain)
    # dg[a, b, l] = d_l g_ab
    lower = 0.5 * (
        np.einsum("jki->ijk", dg) + np.einsum("ikj->ijk", dg) - np.einsum("ijk->ijk", dg)
    )
    upper = np.einsum("ijl,lk->ijk", lower, np.linalg.inv(g))
    return upper, lower


def alpha_interpolation(gamma_e: np.ndarray, gamma_m: np.ndarray, alpha: float) -> np.ndarray:
    """``(1+alpha)/2 Gamma + (1-alpha)/2 Gamma*`` from the alpha = +1 and -1 symbols."""
    return 0.5 * (1.0 + alpha) * gamma_e + 0.5 * (1.0 - alpha) * gamma_m


# ---------------------------------------------------------------------------
# structures induced by a divergence


def _mixed(D, theta, h, i, j):
    n = theta.size
    ei = np.zeros(n)
    ej = np.zeros(n)
    ei[i] = h
    ej[j] = h
    return (D(theta + ei, theta + ej) - D(theta + ei, theta - ej)
            - D(theta - ei, theta + ej) + D(theta - ei, theta - ej)) / (4 * h * h)


def eguchi_metric(D: Callable, theta, step: float = HESS_STEP) -> np.ndarray:
    """``g_ij = -d_i d'_j D(theta : theta')`` at ``theta' = theta``."""
    theta = as_point(theta)
    h = step * max(1.0, float(np.max(np.abs(theta))))
    n = theta.size
    g = np.array([[-_mixed(D, theta, h, i, j) for j in range(n)] for i in range(n)])
    return 0.5 * (g + g.T)


def eguchi_christoffels(D: Callable, theta, step: float = 1e-3) -> tuple[np.ndarray, np.ndarray]:
    """Induced ``(Gamma_{ij,k}, Gamma*_{ij,k})``: ``-d_i d_j d'_k D`` and ``-d'_i d'_j d_k D``."""
    theta = as_point(theta)
    n = theta.size
    h = step * max(1.0, float(np.max(np.abs(theta))))
    E = np.eye(n) * h

    def third(Dfun):
        T = np.empty((n, n, n))
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    def dij(tp):
                        return (Dfun(theta + E[i] + E[j], tp) - Dfun(theta + E[i] - E[j], tp)
                                - Dfun(theta - E[i] + E[j], tp) + Dfun(theta - E[i] - E[j], tp)) / (4 * h * h)
                    T[i, j, k] = -(dij(theta + E[k]) - dij(theta - E[k])) / (2 * h)
        return T

    gamma = third(D)
    gamma_star = third(lambda a, b: D(b, a))
    return gamma, gamma_star


# ---------------------------------------------------------------------------
# Fisher-Rao distances


def rao_distance_categorical(p, q) -> float:
    """Closed form ``2 arccos(sum sqrt(p_i q_i))`` (great-circle distance on the sphere)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("distributions differ in size")
    if np.any(p <= 0) or np.any(q <= 0):
        raise SupportError("Fisher-Rao distance needs strictly positive probabilities")
    bc = float(np.sum(np.sqrt(p * q)))
    return 2.0 * float(np.arccos(min(1.0, bc)))


def _path_length(metric, nodes):
    d = np.diff(nodes, axis=0)
    mids = 0.5 * (nodes[1:] + nodes[:-1])
    return float(sum(np.sqrt(max(di @ metric(m) @ di, 0.0)) for di, m in zip(d, mids)))


PATH_MARGIN = 1e-8
PATH_REL_TOL = 1e-6
COARSEST_SEGMENTS = 8


def _constant_speed_line(metric, theta1, theta2, N, refine=16):
    """Nodes on the straight segment spaced at equal metric length."""
    s = np.linspace(0.0, 1.0, refine * N + 1)
    d = theta2 - theta1
    mids = 0.5 * (s[1:] + s[:-1])
    speed = np.array([np.sqrt(max(d @ metric(theta1 + m * d) @ d, 0.0)) for m in mids])
    cum = np.concatenate([[0.0], np.cumsum(speed)])
    targets = np.linspace(0.0, cum[-1], N + 1)
    u = np.interp(targets, cum, s)
    return theta1 + u[:, None] * d


def _relax_path(nodes, metric, metric_derivative, bounds, max_iter):
    """Minimize the discrete energy over the interior nodes (endpoints fixed)."""
    N = nodes.shape[0] - 1
    D = nodes.shape[1]
    dt = 1.0 / N

    def unpack(z):
        out = nodes.copy()
        out[1:-1] = z.reshape(N - 1, D)
        return out

    def energy_and_grad(z):
        path = unpack(z)
        d = np.diff(path, axis=0)
        mids = 0.5 * (path[1:] + path[:-1])
        E = 0.0
        grad_nodes = np.zeros_like(path)
        for u in range(N):
            try:
                g = np.asarray(metric(mids[u]), dtype=float)
                dg = np.asarray(metric_derivative(mids[u]), dtype=float)
            except InfoGeoError:
                return 1e300, np.zeros_like(z)
            gd = g @ d[u]
            E += float(d[u] @ gd) / dt
            curv = 0.5 * np.einsum("abl,a,b->l", dg, d[u], d[u]) / dt
            grad_nodes[u + 1] += 2.0 * gd / dt + curv
            grad_nodes[u] += -2.0 * gd / dt + curv
        return E, grad_nodes[1:-1].ravel()

    res = minimize(energy_and_grad, nodes[1:-1].ravel(), jac=True, method="L-BFGS-B",
                   bounds=None if bounds is None else bounds * (N - 1),
                   options={"maxiter": max_iter, "gtol": 1e-10, "ftol": 1e-13})
    if not np.isfinite(res.fun) or res.fun >= 1e299:
        raise ConvergenceError("path-energy minimization left the domain")
    return unpack(res.x)


def _refine(nodes, N):
    """Resample a path to ``N`` segments by linear interpolation in the parameter."""
    s_old = np.linspace(0.0, 1.0, nodes.shape[0])
    s_new = np.linspace(0.0, 1.0, N + 1)
    return np.column_stack([np.interp(s_new, s_old, nodes[:, j]) for j in range(nodes.shape[1])])


def rao_distance_numeric(model, theta1, theta2, segments: int = 100, max_iter: int = 2000,
                         metric_derivative: Optional[Callable] = None, full: bool = False):
    """Fisher-Rao distance by minimizing the discretized path energy.

    ``model`` is a family (its ``fim`` is the metric) or a metric callable.
    The energy ``sum_u (dtheta_u' g(mid_u) dtheta_u) / dt`` over the interior
    nodes is minimized by L-BFGS, coarse to fine: a path relaxed with few
    segments seeds the next level with twice as many.  The coarsest level
    starts from the straight line at constant metric speed.  Returns the
    length of the optimized path.
    """
    theta1 = as_point(theta1)
    theta2 = as_point(theta2)
    if segments < 16:
        raise ValueError("use at least 16 segments")
    metric = model.fim if hasattr(model, "fim") else model
    if metric_derivative is None and hasattr(model, "potential"):
        potential = model.potential

        def metric_derivative(t):
            return cc.cubic_tensor(potential, t)

    if metric_derivative is None:
        def metric_derivative(t):
            # [a, b, l] = d_l g_ab
            return cc.fd_jacobian(lambda s: np.asarray(metric(s), dtype=float), t)

    N = int(segments)
    if np.array_equal(theta1, theta2):
        return (0.0, np.repeat(theta1[None, :], N + 1, axis=0)) if full else 0.0

    bounds = None
    domain = getattr(getattr(model, "potential", None), "domain", None)
    if isinstance(domain, cc.Box):
        # keep trial steps of the line search inside an open box domain
        lo = [a + PATH_MARGIN if np.isfinite(a) else None for a in domain.lower]
        hi = [b - PATH_MARGIN if np.isfinite(b) else None for b in domain.upper]
        bounds = list(zip(lo, hi))

    levels = [N]
    while levels[-1] // 2 >= COARSEST_SEGMENTS:
        levels.append(levels[-1] // 2)
    nodes = _constant_speed_line(metric, theta1, theta2, levels[-1])
    for n_seg in reversed(levels):
        if nodes.shape[0] != n_seg + 1:
            nodes = _refine(nodes, n_seg)
        nodes = _relax_path(nodes, metric, metric_derivative, bounds, max_iter)

    length = _path_length(metric, nodes)
    straight_length = _path_length(metric, _constant_speed_line(metric, theta1, theta2, N))
    if length > straight_length * (1 + PATH_REL_TOL) + 1e-12:
        raise ConvergenceError("optimized path is longer than the straight line")
    return (length, nodes) if full else length


# ---------------------------------------------------------------------------
# Cramer-Rao


@dataclass(frozen=True)
class CRLBReport:
    """Empirical MLE covariance against the Cramer-Rao bound.

    ``eta_*`` refer to the moment parameter (bound ``hess F / n``, attained
    exactly by the sample mean); ``theta_*`` to the natural parameter (bound
    ``inv(hess F) / n``).  ``gap_min_eig`` is the smallest eigenvalue of
    ``theta_cov - theta_bound`` and ``gap_stderr`` its bootstrap standard error.
    """

    eta_cov: np.ndarray
    eta_bound: np.ndarray
    theta_cov: np.ndarray
    theta_bound: np.ndarray
    gap_min_eig: float
    gap_stderr: float
    trials: int
    n: int

    @property
    def ok(self) -> bool:
        return self.gap_min_eig >= -3.0 * self.gap_stderr


def crlb_empirical(fam, theta, n: int, trials: int, seed=0, n_boot: int = 200, check: bool = True) -> CRLBReport:
    """Repeat moment-matching MLE fits and compare their spread with the bound.

    Trial ``t`` uses seed ``seed + t``.
    """
    theta = fam.check(theta)
    etas = np.empty((trials, fam.dim))
    thetas = np.empty((trials, fam.dim))
    for t in range(trials):
        x = fam.sample(theta, n, seed + t)
        eta_hat = np.mean(fam.sufficient(x), axis=0)
        etas[t] = eta_hat
        thetas[t] = fam.eta_to_theta(eta_hat)
    I = fam.fim(theta)
    eta_cov = np.atleast_2d(np.cov(etas, rowvar=False))
    theta_cov = np.atleast_2d(np.cov(thetas, rowvar=False))
    theta_bound = np.linalg.inv(I) / n
    gap = np.linalg.eigvalsh(theta_cov - theta_bound).min()
    rng = np.random.default_rng(seed)
    boots = []
    for _ in range(n_boot):
        idx = rng.integers(0, trials, trials)
        c = np.atleast_2d(np.cov(thetas[idx], rowvar=False))
        boots.append(np.linalg.eigvalsh(c - theta_bound).min())
    report = CRLBReport(eta_cov, I / n, theta_cov, theta_bound, float(gap), float(np.std(boots, ddof=1)),
                        int(trials), int(n))
    if check and not report.ok:
        raise AssertionError(f"empirical covariance falls below the Cramer-Rao bound ({gap:.3g})")
    return report
