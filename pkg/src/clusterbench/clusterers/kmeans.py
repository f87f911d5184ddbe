"""k-means with Lloyd and MacQueen update rules.

Initialization picks k distinct data objects uniformly at random. Empty
clusters are reseeded to the point currently farthest from its own centroid.
With nstart > 1 the run with the lowest within-cluster sum of squares wins.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidKError
from ..metrics import Partition
from .base import ClusterResult

VARIANTS = ("lloyd", "macqueen")


def _sq_cross(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    sq = (
        (x * x).sum(axis=1)[:, None]
        + (centers * centers).sum(axis=1)[None, :]
        - 2.0 * (x @ centers.T)
    )
    return np.clip(sq, 0.0, None)


def _sse(x: np.ndarray, centers: np.ndarray, assign: np.ndarray) -> float:
    diff = x - centers[assign]
    return float((diff * diff).sum())


def _reseed_empty(x, centers, assign, counts):
    """Move each empty cluster's centroid onto the farthest-from-home point."""
    dist_home = ((x - centers[assign]) ** 2).sum(axis=1)
    for c in np.flatnonzero(counts == 0):
        far = int(np.argmax(dist_home))
        old = assign[far]
        counts[old] -= 1
        counts[c] += 1
        centers[c] = x[far]
        assign[far] = c
        dist_home[far] = 0.0


def _lloyd(x, k, iter_max, rng):
    n = x.shape[0]
    centers = x[rng.choice(n, size=k, replace=False)].copy()
    assign = np.full(n, -1, dtype=np.int64)
    trace = []
    converged = False
    iterations = 0
    for _ in range(iter_max):
        iterations += 1
        new_assign = np.argmin(_sq_cross(x, centers), axis=1)
        counts = np.bincount(new_assign, minlength=k)
        if np.any(counts == 0):
            _reseed_empty(x, centers, new_assign, counts)
        for c in range(k):
            members = x[new_assign == c]
            if members.shape[0]:
                centers[c] = members.mean(axis=0)
        trace.append(_sse(x, centers, new_assign))
        fixpoint = np.array_equal(new_assign, assign)
        assign = new_assign
        if fixpoint:
            converged = True
            break
    return assign, centers, trace, converged, iterations


def _macqueen(x, k, iter_max, rng):
    n = x.shape[0]
    init = rng.choice(n, size=k, replace=False)
    centers = x[init].copy()
    counts = np.zeros(k, dtype=np.int64)
    assign = np.full(n, -1, dtype=np.int64)
    trace = []
    converged = False
    iterations = 0
    for _ in range(iter_max):
        iterations += 1
        moves = 0
        for i in range(n):
            c = int(np.argmin(((centers - x[i]) ** 2).sum(axis=1)))
            old = assign[i]
            if old == c:
                continue
            if old >= 0:
                counts[old] -= 1
                if counts[old] > 0:
                    centers[old] -= (x[i] - centers[old]) / counts[old]
            counts[c] += 1
            centers[c] += (x[i] - centers[c]) / counts[c]
            assign[i] = c
            moves += 1
        if np.any(counts == 0):
            _reseed_empty(x, centers, assign, counts)
            moves += 1
        trace.append(_sse(x, centers, assign))
        if moves == 0:
            converged = True
            break
    return assign, centers, trace, converged, iterations


def kmeans(
    features: np.ndarray,
    k: int,
    iter_max: int = 10,
    nstart: int = 1,
    variant: str = "lloyd",
    rng: np.random.Generator | None = None,
) -> ClusterResult:
    """Cluster rows of `features` into k groups, minimizing within-cluster SSE."""
    x = np.asarray(features, dtype=np.float64)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise InvalidKError(f"need 1 <= k <= {n}, got k={k}")
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if rng is None:
        rng = np.random.default_rng()
    step = _lloyd if variant == "lloyd" else _macqueen
    best = None
    for _ in range(max(1, nstart)):
        assign, centers, trace, converged, iterations = step(x, k, iter_max, rng)
        objective = trace[-1]
        if best is None or objective < best[0]:
            best = (objective, assign, trace, converged, iterations)
    objective, assign, trace, converged, iterations = best
    return ClusterResult(
        partition=Partition(assign, num_clusters=k),
        objective=objective,
        iterations_used=iterations,
        converged=converged,
        objective_trace=tuple(trace),
    )
