"""Partitioning around medoids and its subsampled variant.

pam runs the classical BUILD phase (greedy seeding) followed by
best-improvement SWAP passes on a precomputed dissimilarity matrix. clara
repeats pam on random subsamples, always carrying the best medoid set found
so far into the next subsample, and judges each candidate set by its total
dissimilarity over the full dataset.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidKError, InvalidSampsizeError
from ..metrics import Partition
from .base import ClusterResult
from .distance import cross_distances, pairwise_distances

SWAP_EPS = 1e-12


def _build(d: np.ndarray, k: int) -> np.ndarray:
    """Greedy BUILD seeding: most central object, then best gain each step."""
    n = d.shape[0]
    medoid_mask = np.zeros(n, dtype=bool)
    first = int(np.argmin(d.sum(axis=1)))
    medoid_mask[first] = True
    nearest = d[first].copy()
    while medoid_mask.sum() < k:
        gains = np.clip(nearest[None, :] - d, 0.0, None).sum(axis=1)
        gains[medoid_mask] = -np.inf
        cand = int(np.argmax(gains))
        medoid_mask[cand] = True
        nearest = np.minimum(nearest, d[cand])
    return medoid_mask


def _swap_descent(d: np.ndarray, medoid_mask: np.ndarray, k: int):
    """Best-improvement swaps until no exchange reduces the objective."""
    n = d.shape[0]
    trace = [float(d[np.flatnonzero(medoid_mask)].min(axis=0).sum())]
    while True:
        medoids = np.flatnonzero(medoid_mask)
        med_dist = d[medoids]
        owner = np.argmin(med_dist, axis=0)
        part = np.partition(med_dist, min(1, k - 1), axis=0)
        d1 = part[0]
        d2 = part[min(1, k - 1)] if k > 1 else np.full(n, np.inf)
        best_delta = -SWAP_EPS
        best_swap = None
        for mi in range(k):
            mask = owner == mi
            # Cost change if medoid mi is replaced by each candidate row h:
            # points owned by mi fall back to their second choice or h,
            # everyone else can only improve by switching to h.
            owned = (
                np.minimum(d[:, mask], d2[mask]).sum(axis=1) - d1[mask].sum()
            )
            others = np.minimum(d[:, ~mask] - d1[~mask], 0.0).sum(axis=1)
            delta = owned + others
            delta[medoid_mask] = np.inf
            h = int(np.argmin(delta))
            if delta[h] < best_delta:
                best_delta = float(delta[h])
                best_swap = (int(medoids[mi]), h)
        if best_swap is None:
            break
        out_med, in_med = best_swap
        medoid_mask[out_med] = False
        medoid_mask[in_med] = True
        trace.append(float(d[np.flatnonzero(medoid_mask)].min(axis=0).sum()))
    return medoid_mask, trace


def pam(
    dissimilarity: np.ndarray,
    k: int,
    rng: np.random.Generator | None = None,
    restarts: int = 16,
    return_trace: bool = False,
):
    """Medoid indices minimizing total dissimilarity (BUILD + SWAP).

    The main pass seeds medoids with BUILD and descends by best-improvement
    swaps; ties always resolve to the lowest index. Because a single swap
    descent can stall in a local optimum, `restarts` additional descents
    start from medoid sets drawn from rng, and the best objective wins
    (the BUILD pass wins ties, so restarts never perturb an already optimal
    result). With return_trace=True also returns the winning descent's
    objective after seeding and after every accepted swap.
    """
    d = np.asarray(dissimilarity, dtype=np.float64)
    n = d.shape[0]
    if d.ndim != 2 or d.shape[1] != n:
        raise InvalidKError(f"dissimilarity must be square, got {d.shape}")
    if not 1 <= k <= n:
        raise InvalidKError(f"need 1 <= k <= {n}, got k={k}")
    if rng is None:
        rng = np.random.default_rng(0)

    mask, trace = _swap_descent(d, _build(d, k), k)
    best = (trace[-1], mask, trace)
    for _ in range(max(0, restarts) if k < n else 0):
        seed_mask = np.zeros(n, dtype=bool)
        seed_mask[rng.choice(n, size=k, replace=False)] = True
        mask, trace = _swap_descent(d, seed_mask, k)
        if trace[-1] < best[0] - SWAP_EPS:
            best = (trace[-1], mask, trace)

    medoids = np.flatnonzero(best[1])
    if return_trace:
        return medoids, tuple(best[2])
    return medoids


def clara(
    features: np.ndarray,
    k: int,
    samples: int = 5,
    sampsize: int | None = None,
    metric: str = "euclidean",
    rng: np.random.Generator | None = None,
) -> ClusterResult:
    """pam on random subsamples, keeping the medoids best over the full data."""
    x = np.asarray(features, dtype=np.float64)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise InvalidKError(f"need 1 <= k <= {n}, got k={k}")
    if sampsize is None:
        sampsize = min(n, 40 + 2 * k)
    if not k < sampsize <= n:
        raise InvalidSampsizeError(
            f"need k < sampsize <= N, got k={k} sampsize={sampsize} N={n}"
        )
    if rng is None:
        rng = np.random.default_rng()

    best_medoids = None
    best_objective = np.inf
    best_labels = None
    trace = []
    for _ in range(max(1, samples)):
        if best_medoids is None:
            sub = rng.choice(n, size=sampsize, replace=False)
        else:
            pool = np.setdiff1d(np.arange(n), best_medoids, assume_unique=False)
            fill = rng.choice(pool, size=sampsize - k, replace=False)
            sub = np.concatenate([best_medoids, fill])
        sub = np.sort(sub)
        local = pam(pairwise_distances(x[sub], metric), k)
        medoids = sub[local]
        med_dist = cross_distances(x, x[medoids], metric)
        labels = np.argmin(med_dist, axis=1)
        objective = float(med_dist[np.arange(n), labels].sum())
        if objective < best_objective:
            best_objective = objective
            best_medoids = medoids
            best_labels = labels
        trace.append(best_objective)

    return ClusterResult(
        partition=Partition(best_labels, num_clusters=k),
        objective=best_objective,
        iterations_used=len(trace),
        converged=True,
        objective_trace=tuple(trace),
    )
