"""Agglomerative hierarchical clustering via Lance-Williams updates.

Linkages: single, complete, average (UPGMA, the default), weighted (WPGMA)
and ward. Ward operates on squared distances, the others on plain distances.
The pair with the smallest inter-cluster dissimilarity merges first; ties
break on the lowest (i, j) slot pair. Cutting at k clusters simply stops
after N - k merges, which is equivalent to undoing the last k - 1 merges of
the full dendrogram because every implemented linkage is monotone.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidKError
from ..metrics import Partition
from .base import ClusterResult
from .distance import pairwise_distances

METHODS = ("average", "single", "complete", "ward", "weighted")


def hierarchical(
    features: np.ndarray,
    k: int,
    metric: str = "euclidean",
    method: str = "average",
    par_method: float = 0.0,
) -> ClusterResult:
    """Agglomerate rows of `features` down to exactly k clusters.

    par_method is accepted for parameter-space parity but has no effect on
    any implemented linkage.
    """
    del par_method
    x = np.asarray(features, dtype=np.float64)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise InvalidKError(f"need 1 <= k <= {n}, got k={k}")
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")

    d = pairwise_distances(x, metric)
    if method == "ward":
        d = d * d
    np.fill_diagonal(d, np.inf)

    sizes = np.ones(n)
    active = np.ones(n, dtype=bool)
    slot_of = np.arange(n)
    heights = []

    for _ in range(n - k):
        flat = int(np.argmin(d))
        i, j = divmod(flat, n)
        if i > j:
            i, j = j, i
        heights.append(float(d[i, j]))

        di = d[i].copy()
        dj = d[j].copy()
        ni, nj = sizes[i], sizes[j]
        if method == "single":
            merged = np.minimum(di, dj)
        elif method == "complete":
            merged = np.maximum(di, dj)
        elif method == "average":
            merged = (ni * di + nj * dj) / (ni + nj)
        elif method == "weighted":
            merged = 0.5 * (di + dj)
        else:  # ward, in squared-distance units
            nt = sizes
            total = ni + nj + nt
            merged = ((ni + nt) * di + (nj + nt) * dj - nt * d[i, j]) / total

        merged[~active] = np.inf
        merged[i] = np.inf
        merged[j] = np.inf
        d[i, :] = merged
        d[:, i] = merged
        d[j, :] = np.inf
        d[:, j] = np.inf
        sizes[i] = ni + nj
        active[j] = False
        slot_of[slot_of == j] = i

    # Compact the surviving slots to labels 0..k-1 in first-appearance order.
    labels = np.empty(n, dtype=np.int64)
    seen: dict[int, int] = {}
    for idx, slot in enumerate(slot_of):
        if slot not in seen:
            seen[slot] = len(seen)
        labels[idx] = seen[slot]

    objective = heights[-1] if heights else 0.0
    return ClusterResult(
        partition=Partition(labels, num_clusters=k),
        objective=objective,
        iterations_used=n - k,
        converged=True,
        objective_trace=tuple(heights),
    )
