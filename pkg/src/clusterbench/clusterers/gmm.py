"""Gaussian mixture clustering by expectation-maximization.

Four covariance constraints are supported: one shared spherical variance,
per-cluster spherical variances (the default), per-cluster diagonal
covariances, and per-cluster full covariances. Responsibilities start either
from uniformly random soft assignments followed by an M-step, or from a
k-means hard partition.

Covariance eigenvalues and variances are floored at 1e-6 times the mean
feature variance; the floor only binds near degeneracy, so non-degenerate
fits (e.g. the k = 1 maximum-likelihood solution) are exact.
"""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateFitError, InvalidKError
from ..linalg import eigh, symmetrize
from ..metrics import Partition
from .base import ClusterResult
from .kmeans import kmeans

MODELS = (
    "spherical-shared",
    "spherical-varying",
    "diagonal-varying",
    "full-varying",
)
INITS = ("random-z", "kmeans-z")

VAR_FLOOR_FACTOR = 1e-6
MAX_RESEEDS_PER_COMPONENT = 3
LOG_2PI = float(np.log(2.0 * np.pi))


def _log_gaussians(x, means, params, model, var_floor):
    """n x k matrix of log N(x_i | mu_k, Sigma_k)."""
    n, f = x.shape
    k = means.shape[0]
    out = np.empty((n, k))
    if model in ("spherical-shared", "spherical-varying"):
        variances = params  # length k (shared model repeats one value)
        for c in range(k):
            sq = ((x - means[c]) ** 2).sum(axis=1)
            out[:, c] = -0.5 * (f * (LOG_2PI + np.log(variances[c])) + sq / variances[c])
    elif model == "diagonal-varying":
        variances = params  # k x f
        for c in range(k):
            sq = ((x - means[c]) ** 2 / variances[c]).sum(axis=1)
            out[:, c] = -0.5 * (f * LOG_2PI + np.log(variances[c]).sum() + sq)
    else:
        covs = params  # k x f x f
        for c in range(k):
            decomp = eigh(covs[c])
            vals = np.maximum(decomp.values, var_floor)
            centered = (x - means[c]) @ decomp.vectors
            maha = ((centered / np.sqrt(vals)) ** 2).sum(axis=1)
            out[:, c] = -0.5 * (f * LOG_2PI + np.log(vals).sum() + maha)
    return out


def _m_step(x, z, model, var_floor):
    n, f = x.shape
    k = z.shape[1]
    nk = z.sum(axis=0)
    weights = nk / n
    means = (z.T @ x) / nk[:, None]
    if model == "spherical-varying":
        params = np.empty(k)
        for c in range(k):
            sq = ((x - means[c]) ** 2).sum(axis=1)
            params[c] = max((z[:, c] * sq).sum() / (nk[c] * f), var_floor)
    elif model == "spherical-shared":
        total = 0.0
        for c in range(k):
            sq = ((x - means[c]) ** 2).sum(axis=1)
            total += (z[:, c] * sq).sum()
        params = np.full(k, max(total / (n * f), var_floor))
    elif model == "diagonal-varying":
        params = np.empty((k, f))
        for c in range(k):
            params[c] = np.maximum(
                (z[:, c, None] * (x - means[c]) ** 2).sum(axis=0) / nk[c], var_floor
            )
    else:
        params = np.empty((k, f, f))
        for c in range(k):
            centered = x - means[c]
            cov = (z[:, c, None] * centered).T @ centered / nk[c]
            cov = symmetrize(cov)
            decomp = eigh(cov)
            if decomp.values[0] < var_floor:
                vals = np.maximum(decomp.values, var_floor)
                cov = (decomp.vectors * vals) @ decomp.vectors.T
            params[c] = cov
    return weights, means, params


def _log_sum_exp(a):
    amax = a.max(axis=1, keepdims=True)
    return amax[:, 0] + np.log(np.exp(a - amax).sum(axis=1))


def em_gmm(
    features: np.ndarray,
    k: int,
    model: str = "spherical-varying",
    init: str = "random-z",
    max_iter: int = 200,
    tol: float = 1e-8,
    rng: np.random.Generator | None = None,
) -> ClusterResult:
    """Fit a k-component Gaussian mixture and return the argmax partition."""
    x = np.asarray(features, dtype=np.float64)
    n, f = x.shape
    if not 1 <= k <= n:
        raise InvalidKError(f"need 1 <= k <= {n}, got k={k}")
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}, got {model!r}")
    if init not in INITS:
        raise ValueError(f"init must be one of {INITS}, got {init!r}")
    if rng is None:
        rng = np.random.default_rng()

    scale = float(np.var(x, axis=0).mean())
    if scale <= 0.0:
        scale = 1.0
    var_floor = VAR_FLOOR_FACTOR * scale

    if init == "random-z":
        z = rng.uniform(size=(n, k))
        z /= z.sum(axis=1, keepdims=True)
    else:
        hard = kmeans(x, k, rng=rng).partition.assignments
        z = np.zeros((n, k))
        z[np.arange(n), hard] = 1.0
        # Tiny smoothing so no component starts with zero responsibility.
        z = (z + 1e-6) / (1.0 + k * 1e-6)

    point_ll = np.zeros(n)
    reseeds = 0
    trace = []
    converged = False
    iterations = 0
    weights = means = params = None
    for _ in range(max_iter):
        iterations += 1
        nk = z.sum(axis=0)
        collapsed = np.flatnonzero(nk < 1e-10)
        if collapsed.size:
            reseeds += collapsed.size
            if reseeds > MAX_RESEEDS_PER_COMPONENT * k:
                raise DegenerateFitError(
                    f"{reseeds} component reseeds; mixture fit is degenerate"
                )
            worst_points = np.argsort(point_ll, kind="stable")[: collapsed.size]
            for c, worst in zip(collapsed, worst_points):
                z[:, c] = 0.0
                z[worst, :] = 0.0
                z[worst, c] = 1.0
        weights, means, params = _m_step(x, z, model, var_floor)
        log_pdf = _log_gaussians(x, means, params, model, var_floor)
        log_w = log_pdf + np.log(weights)[None, :]
        point_ll = _log_sum_exp(log_w)
        z = np.exp(log_w - point_ll[:, None])
        ll = float(point_ll.sum())
        if trace and ll - trace[-1] < tol:
            trace.append(ll)
            converged = True
            break
        trace.append(ll)

    labels = np.argmax(z, axis=1)
    return ClusterResult(
        partition=Partition(labels, num_clusters=k),
        objective=trace[-1],
        iterations_used=iterations,
        converged=converged,
        objective_trace=tuple(trace),
    )
