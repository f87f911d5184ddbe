"""Shared clusterer plumbing: parameter descriptors, configs, results."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..errors import UnknownParameterError
from ..metrics import Partition

INTEGER_RANGE = "integer-range"
REAL_RANGE = "real-range"
CATEGORICAL = "categorical"


@dataclass(frozen=True)
class ParamDescriptor:
    """One declared algorithm parameter: kind, default and admissible values.

    A default of None marks a data-dependent parameter (e.g. clara's
    sampsize); its concrete default and bounds come from resolve() once the
    dataset shape is known.
    """

    name: str
    kind: str
    default: Any
    low: float | int | None = None
    high: float | int | None = None
    choices: tuple[Any, ...] | None = None
    log_scale: bool = False

    def __post_init__(self):
        if self.kind not in (INTEGER_RANGE, REAL_RANGE, CATEGORICAL):
            raise UnknownParameterError(f"unknown parameter kind {self.kind!r}")
        if self.default is not None:
            self.validate_value(self.default)

    @property
    def data_dependent(self) -> bool:
        return self.default is None

    def validate_value(self, value) -> None:
        """Raise UnknownParameterError if value does not fit this descriptor."""
        if self.kind == CATEGORICAL:
            if value not in (self.choices or ()):
                raise UnknownParameterError(
                    f"{self.name}: {value!r} not among choices {self.choices}"
                )
            return
        if self.kind == INTEGER_RANGE and not isinstance(value, (int,)):
            raise UnknownParameterError(f"{self.name}: expected an integer, got {value!r}")
        if self.kind == REAL_RANGE and not isinstance(value, (int, float)):
            raise UnknownParameterError(f"{self.name}: expected a real, got {value!r}")
        if self.low is not None and value < self.low:
            raise UnknownParameterError(f"{self.name}: {value} below lower bound {self.low}")
        if self.high is not None and value > self.high:
            raise UnknownParameterError(f"{self.name}: {value} above upper bound {self.high}")


@dataclass(frozen=True)
class ClustererConfig:
    """A concrete parameter assignment for one algorithm run."""

    algorithm: str
    k: int
    assignments: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.k < 1:
            raise UnknownParameterError(f"k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class ClusterResult:
    """Partition plus the algorithm-specific objective and convergence info.

    objective_trace records the per-iteration objective (SSE, best-so-far
    dissimilarity, merge heights or log-likelihood) for monotonicity checks;
    flags carries non-fatal anomalies such as floored spectral degrees.
    """

    partition: Partition
    objective: float
    iterations_used: int
    converged: bool
    objective_trace: tuple[float, ...] | None = None
    flags: tuple[str, ...] = ()
