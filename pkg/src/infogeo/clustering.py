"""Bregman k-means with k-means++ seeding.

Points go in the first divergence argument and centers in the second,
``B_F(point : center)``; in that orientation the optimal center of a cluster
is the arithmetic mean of its members, whatever the potential.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .convexcore import PotentialFunction
from .divergences import bregman
from .errors import EmptyClusterError
from .mixfam import MixtureFamily, mc_generator

MAX_ITER = 300
MAX_RESEEDS = 10
N_INIT = 10


@dataclass(frozen=True, eq=False)
class ClusteringProblem:
    points: np.ndarray
    F: PotentialFunction
    k: int
    seed: int = 0
    n_init: int = N_INIT

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.shape[1] != self.F.dim:
            raise ValueError(f"points have dimension {pts.shape[1]}, potential {self.F.dim}")
        if not 1 <= self.k <= pts.shape[0]:
            raise ValueError(f"k={self.k} outside 1..{pts.shape[0]}")
        if self.n_init < 1:
            raise ValueError("n_init must be at least 1")
        for p in pts:
            self.F.domain.check(p)
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class ClusteringResult:
    assignments: np.ndarray
    centers: np.ndarray
    objective: float
    iterations: int
    history: tuple = ()


def divergence_matrix(F: PotentialFunction, points, centers) -> np.ndarray:
    """``M[i, j] = B_F(points[i] : centers[j])``."""
    return np.array([[bregman(F, p, c) for c in centers] for p in points])


def kmeanspp_seed(points, F: PotentialFunction, k: int, seed=0) -> np.ndarray:
    """k-means++ with the Bregman divergence to the nearest chosen center.

    Returns the indices of the chosen points.  Points at zero divergence from
    a chosen center are never picked while positive mass remains; after that
    the remaining unchosen indices are drawn uniformly.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")
    rng = np.random.default_rng(seed)
    chosen = [int(rng.integers(n))]
    nearest = np.array([bregman(F, p, pts[chosen[0]]) for p in pts])
    while len(chosen) < k:
        weights = nearest.copy()
        weights[chosen] = 0.0
        total = weights.sum()
        if total > 0:
            idx = int(rng.choice(n, p=weights / total))
        else:
            rest = np.setdiff1d(np.arange(n), chosen)
            idx = int(rng.choice(rest))
        chosen.append(idx)
        nearest = np.minimum(nearest, [bregman(F, p, pts[idx]) for p in pts])
    return np.array(chosen)


def _assign(D: np.ndarray) -> np.ndarray:
    # argmin returns the lowest index among ties
    return np.argmin(D, axis=1)


def _objective(D: np.ndarray, labels: np.ndarray) -> float:
    return float(np.sum(D[np.arange(D.shape[0]), labels]))


def bregman_kmeans(prob: ClusteringProblem, init: Optional[np.ndarray] = None) -> ClusteringResult:
    """Best of ``prob.n_init`` Lloyd runs (lowest objective, earliest on ties).

    Run ``r`` is seeded by k-means++ with seed ``prob.seed + r``.  Passing
    ``init`` (indices of the starting centers) performs that single run.
    """
    if init is not None:
        return _lloyd(prob, np.asarray(init))
    best = None
    for r in range(prob.n_init):
        res = _lloyd(prob, kmeanspp_seed(prob.points, prob.F, prob.k, prob.seed + r))
        if best is None or res.objective < best.objective:
            best = res
    return best


def _lloyd(prob: ClusteringProblem, idx: np.ndarray) -> ClusteringResult:
    """Lloyd iterations: nearest-center assignment, then mean update.

    Stops when assignments repeat or after 300 iterations.  An empty cluster
    is reseeded at the point farthest (in divergence) from its center.
    """
    F, pts, k = prob.F, prob.points, prob.k
    n = pts.shape[0]
    centers = pts[idx].copy()
    D = divergence_matrix(F, pts, centers)
    labels = _assign(D)
    history = [_objective(D, labels)]
    reseeds = 0
    it = 0
    for it in range(1, MAX_ITER + 1):
        counts = np.bincount(labels, minlength=k)
        while np.any(counts == 0):
            reseeds += 1
            if reseeds > MAX_RESEEDS:
                raise EmptyClusterError("empty clusters keep reappearing")
            j = int(np.nonzero(counts == 0)[0][0])
            own = D[np.arange(n), labels]
            # farthest point whose cluster can spare it
            order = np.argsort(-own, kind="stable")
            donor = next(i for i in order if counts[labels[i]] > 1)
            counts[labels[donor]] -= 1
            labels[donor] = j
            counts[j] += 1
        centers = np.array([pts[labels == j].mean(axis=0) for j in range(k)])
        D = divergence_matrix(F, pts, centers)
        obj_update = _objective(D, labels)
        new_labels = _assign(D)
        obj = _objective(D, new_labels)
        slack = 1e-12 * max(1.0, history[-1])
        if obj_update > history[-1] + slack or obj > obj_update + slack:
            raise AssertionError("Lloyd objective increased")
        history.append(obj)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return ClusteringResult(labels, centers, history[-1], it, tuple(history))


def cluster_wmixtures(fam: MixtureFamily, thetas, k: int, mc_samples: int = 10_000, seed=0) -> ClusteringResult:
    """Bregman k-means of w-mixtures on one shared Monte-Carlo entropy surrogate."""
    gen = mc_generator(fam, mc_samples, seed)
    thetas = np.array([fam.check(t) for t in np.atleast_2d(np.asarray(thetas, dtype=float))])
    return bregman_kmeans(ClusteringProblem(thetas, gen.potential, k, seed))
