"""The five clustering algorithms and their published parameter spaces.

Every algorithm declares its parameters as ParamDescriptor tuples so the
sweep engine and CLI can enumerate, validate and sample the spaces without
hard-coding names. Parameters whose default or bounds depend on the dataset
(clara's sampsize, spectral's kernel width) declare default None and are
concretized by resolve_descriptor against actual data.
"""

from __future__ import annotations

import numpy as np

from ..errors import UnknownParameterError
from .base import CATEGORICAL, INTEGER_RANGE, REAL_RANGE, ClusterResult, ClustererConfig, ParamDescriptor
from .gmm import INITS, MODELS, em_gmm
from .hierarchy import METHODS, hierarchical
from .kmeans import VARIANTS, kmeans
from .medoids import clara, pam
from .spectral import KERNELS, automatic_kernel_width, spectral

__all__ = [
    "ClusterResult",
    "ClustererConfig",
    "ParamDescriptor",
    "ALGORITHM_NAMES",
    "param_descriptors",
    "default_assignments",
    "resolve_descriptor",
    "resolve_assignments",
    "validate_assignments",
    "run_algorithm",
    "kmeans",
    "clara",
    "pam",
    "hierarchical",
    "em_gmm",
    "spectral",
]

_DESCRIPTORS: dict[str, tuple[ParamDescriptor, ...]] = {
    "kmeans": (
        ParamDescriptor("iter_max", INTEGER_RANGE, 10, low=1, high=100, log_scale=True),
        ParamDescriptor("nstart", INTEGER_RANGE, 1, low=1, high=20),
        ParamDescriptor("variant", CATEGORICAL, "lloyd", choices=VARIANTS),
    ),
    "clara": (
        ParamDescriptor("metric", CATEGORICAL, "euclidean", choices=("euclidean", "manhattan")),
        ParamDescriptor("samples", INTEGER_RANGE, 5, low=1, high=50, log_scale=True),
        ParamDescriptor("sampsize", INTEGER_RANGE, None),
    ),
    "hierarchical": (
        ParamDescriptor("metric", CATEGORICAL, "euclidean", choices=("euclidean", "manhattan")),
        ParamDescriptor("method", CATEGORICAL, "average", choices=METHODS),
        ParamDescriptor("par_method", REAL_RANGE, 0.0, low=0.0, high=1.0),
    ),
    "em": (
        ParamDescriptor("model", CATEGORICAL, "spherical-varying", choices=MODELS),
        ParamDescriptor("init", CATEGORICAL, "random-z", choices=INITS),
        ParamDescriptor("max_iter", INTEGER_RANGE, 200, low=10, high=1000, log_scale=True),
        ParamDescriptor("tol", REAL_RANGE, 1e-8, low=1e-10, high=1e-2, log_scale=True),
    ),
    "spectral": (
        ParamDescriptor("kernel", CATEGORICAL, "rbf", choices=KERNELS),
        ParamDescriptor("kernel_param", REAL_RANGE, None),
        ParamDescriptor("iter", INTEGER_RANGE, 200, low=10, high=1000, log_scale=True),
    ),
}

_RUNNERS = {
    "kmeans": kmeans,
    "clara": clara,
    "hierarchical": hierarchical,
    "em": em_gmm,
    "spectral": spectral,
}

ALGORITHM_NAMES = tuple(_DESCRIPTORS)

# hierarchical is fully deterministic; everything else consumes the rng.
_STOCHASTIC = ("kmeans", "clara", "em", "spectral")


def param_descriptors(algorithm: str) -> tuple[ParamDescriptor, ...]:
    """The declared parameter space of one algorithm."""
    try:
        return _DESCRIPTORS[algorithm]
    except KeyError:
        raise UnknownParameterError(f"unknown algorithm {algorithm!r}") from None


def default_assignments(algorithm: str) -> dict:
    """Default value per parameter; data-dependent defaults appear as None."""
    return {d.name: d.default for d in param_descriptors(algorithm)}


def resolve_descriptor(
    descriptor: ParamDescriptor,
    algorithm: str,
    features: np.ndarray,
    k: int,
) -> ParamDescriptor:
    """Concretize a data-dependent descriptor against an actual dataset.

    clara's sampsize becomes min(N, 40 + 2k) with bounds (k+1, N); spectral's
    kernel_param becomes the automatic width with bounds a factor of 4 around
    it. Static descriptors pass through unchanged.
    """
    if not descriptor.data_dependent:
        return descriptor
    n = int(np.asarray(features).shape[0])
    if algorithm == "clara" and descriptor.name == "sampsize":
        return ParamDescriptor(
            "sampsize", INTEGER_RANGE, min(n, 40 + 2 * k), low=k + 1, high=n
        )
    if algorithm == "spectral" and descriptor.name == "kernel_param":
        width = automatic_kernel_width(features)
        return ParamDescriptor(
            "kernel_param", REAL_RANGE, width, low=width / 4.0, high=4.0 * width,
            log_scale=True,
        )
    raise UnknownParameterError(
        f"no resolution rule for {algorithm}.{descriptor.name}"
    )


def validate_assignments(algorithm: str, assignments: dict) -> None:
    """Check every assignment name and value against the descriptors.

    Data-dependent parameters are only name-checked here; their runtime
    bounds are enforced by the algorithms themselves.
    """
    table = {d.name: d for d in param_descriptors(algorithm)}
    for name, value in assignments.items():
        if name not in table:
            raise UnknownParameterError(
                f"{algorithm} has no parameter {name!r}; "
                f"known: {', '.join(table)}"
            )
        descriptor = table[name]
        if value is None or descriptor.data_dependent:
            continue
        descriptor.validate_value(value)


def resolve_assignments(algorithm: str, assignments: dict | None) -> dict:
    """Defaults overlaid with the given assignments, validated."""
    merged = default_assignments(algorithm)
    if assignments:
        validate_assignments(algorithm, assignments)
        merged.update(assignments)
    return merged


def run_algorithm(
    algorithm: str,
    features: np.ndarray,
    k: int,
    assignments: dict | None = None,
    rng: np.random.Generator | None = None,
) -> ClusterResult:
    """Dispatch one clustering run by algorithm name."""
    merged = resolve_assignments(algorithm, assignments)
    runner = _RUNNERS[algorithm]
    if algorithm in _STOCHASTIC:
        return runner(features, k, rng=rng, **merged)
    return runner(features, k, **merged)
