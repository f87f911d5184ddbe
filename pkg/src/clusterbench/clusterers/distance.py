"""Pairwise and cross distances in the two supported metrics."""

from __future__ import annotations

import numpy as np

METRICS = ("euclidean", "manhattan")


def _check_metric(metric: str) -> None:
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}, got {metric!r}")


def cross_distances(x: np.ndarray, y: np.ndarray, metric: str = "euclidean") -> np.ndarray:
    """len(x) x len(y) distance matrix."""
    _check_metric(metric)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if metric == "euclidean":
        sq = (
            (x * x).sum(axis=1)[:, None]
            + (y * y).sum(axis=1)[None, :]
            - 2.0 * (x @ y.T)
        )
        return np.sqrt(np.clip(sq, 0.0, None))
    out = np.empty((x.shape[0], y.shape[0]))
    for j in range(y.shape[0]):
        out[:, j] = np.abs(x - y[j]).sum(axis=1)
    return out


def pairwise_distances(x: np.ndarray, metric: str = "euclidean") -> np.ndarray:
    """Symmetric distance matrix with an exactly zero diagonal."""
    d = cross_distances(x, x, metric)
    d = (d + d.T) / 2.0
    np.fill_diagonal(d, 0.0)
    return d
