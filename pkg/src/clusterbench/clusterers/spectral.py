"""Spectral clustering on the symmetric normalized Laplacian.

An affinity matrix is built from one of four kernels, the eigenvectors of
the k smallest eigenvalues of L = I - D^(-1/2) A D^(-1/2) form a row
embedding, rows are normalized to the unit sphere, and k-means (nstart=5)
clusters the embedded points. A kernel width of None means automatic: the
median pairwise distance over a uniform subsample of ceil(N/6) points.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import InvalidKError
from ..linalg import eigh, symmetrize
from ..seeds import data_seed
from .base import ClusterResult
from .distance import pairwise_distances
from .kmeans import kmeans

KERNELS = ("rbf", "laplace", "polynomial", "linear")

DEGREE_FLOOR = 1e-12


def automatic_kernel_width(features: np.ndarray) -> float:
    """Median pairwise distance over a ceil(N/6) uniform subsample.

    The subsample is keyed by the data bytes, so the width is a pure
    function of the dataset: all runs on the same data see the same
    automatic width regardless of their own random streams.
    """
    x = np.asarray(features, dtype=np.float64)
    n = x.shape[0]
    size = min(n, max(2, math.ceil(n / 6)))
    rng = np.random.default_rng(data_seed(x, "kernel-width"))
    idx = np.sort(rng.choice(n, size=size, replace=False))
    d = pairwise_distances(x[idx])
    offdiag = d[np.triu_indices(size, k=1)]
    width = float(np.median(offdiag))
    return width if width > 0.0 else 1.0


def _affinity(x, kernel, param):
    if kernel == "rbf":
        sigma = automatic_kernel_width(x) if param is None else float(param)
        d = pairwise_distances(x)
        return np.exp(-(d * d) / (2.0 * sigma * sigma))
    if kernel == "laplace":
        sigma = automatic_kernel_width(x) if param is None else float(param)
        return np.exp(-pairwise_distances(x) / sigma)
    gram = x @ x.T / x.shape[1]
    if kernel == "linear":
        return symmetrize(gram)
    degree = 1 if param is None else max(1, int(round(param)))
    return symmetrize((gram + 1.0) ** degree)


def spectral(
    features: np.ndarray,
    k: int,
    kernel: str = "rbf",
    kernel_param: float | None = None,
    iter: int = 200,
    rng: np.random.Generator | None = None,
) -> ClusterResult:
    """Cluster by k-means over the normalized-Laplacian eigenvector embedding."""
    x = np.asarray(features, dtype=np.float64)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise InvalidKError(f"need 1 <= k <= {n}, got k={k}")
    if kernel not in KERNELS:
        raise ValueError(f"kernel must be one of {KERNELS}, got {kernel!r}")
    if rng is None:
        rng = np.random.default_rng()

    affinity = _affinity(x, kernel, kernel_param)
    degrees = affinity.sum(axis=1)
    flags: tuple[str, ...] = ()
    if np.any(degrees <= DEGREE_FLOOR):
        degrees = np.maximum(degrees, DEGREE_FLOOR)
        flags = ("degree-floored",)
    inv_sqrt = 1.0 / np.sqrt(degrees)
    laplacian = symmetrize(np.eye(n) - affinity * inv_sqrt[:, None] * inv_sqrt[None, :])

    decomp = eigh(laplacian)
    embedding = decomp.vectors[:, :k].copy()
    norms = np.sqrt((embedding * embedding).sum(axis=1))
    nonzero = norms > 0.0
    embedding[nonzero] /= norms[nonzero, None]

    inner = kmeans(embedding, k, iter_max=iter, nstart=5, rng=rng)
    return ClusterResult(
        partition=inner.partition,
        objective=inner.objective,
        iterations_used=inner.iterations_used,
        converged=inner.converged,
        objective_trace=inner.objective_trace,
        flags=flags,
    )
