"""Exception types shared across the package."""


class ClusterBenchError(Exception):
    """Base class for all clusterbench errors."""


class InvalidDimensionError(ClusterBenchError):
    """A matrix or dataset dimension is out of range."""


class InvalidModelError(ClusterBenchError):
    """A class model violates its invariants (non-PSD covariance, bad shift)."""


class IncompatiblePartitionsError(ClusterBenchError):
    """Two partitions cannot be compared (different lengths)."""


class UndefinedIndexError(ClusterBenchError):
    """A validity index is undefined for the given input (e.g. n < 2)."""


class ConvergenceFailureError(ClusterBenchError):
    """An iterative routine failed to converge within its sweep budget."""


class NotPSDError(ClusterBenchError):
    """A matrix required to be positive semi-definite has a materially negative eigenvalue."""


class InvalidKError(ClusterBenchError):
    """Requested cluster count is incompatible with the data."""


class InvalidSampsizeError(ClusterBenchError):
    """clara subsample size must exceed k and not exceed N."""


class DegenerateFitError(ClusterBenchError):
    """Mixture components collapsed repeatedly; no usable fit."""


class DegenerateDataError(ClusterBenchError):
    """Statistical test input is degenerate (e.g. all values identical)."""


class TuningFailedError(ClusterBenchError):
    """Alpha tuning could not reach the target accuracy band.

    Carries the best alpha found so callers can decide whether to use it anyway.
    """

    def __init__(self, message: str, best_alpha: float):
        super().__init__(message)
        self.best_alpha = best_alpha


class ParseError(ClusterBenchError):
    """A dataset file could not be parsed; names the offending line/column."""

    def __init__(self, message: str, line: int, column: int = 0):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UnknownParameterError(ClusterBenchError):
    """A configured parameter or algorithm name does not resolve to a descriptor."""


class OutputExistsError(ClusterBenchError):
    """Refusing to overwrite prior outputs without --force."""
