"""External cluster validity indices.

Two partitions of the same objects are compared through their contingency
table. All pair-counting quantities (a, b, c and the binomial sums behind
the adjusted Rand index) are computed in exact integer arithmetic; Python
integers are unbounded, so no overflow is possible at any corpus size.

Degenerate inputs are total by convention: identical trivial partitions
score 1, and an index whose denominator vanishes for structural reasons
falls back to the documented constant rather than raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import IncompatiblePartitionsError, UndefinedIndexError


@dataclass(frozen=True)
class Partition:
    """Cluster assignment for N objects, labels in [0, num_clusters).

    num_clusters may exceed the number of labels actually present (empty
    clusters are legal and contribute nothing to any index).
    """

    assignments: np.ndarray
    num_clusters: int = 0

    def __post_init__(self):
        labels = np.asarray(self.assignments, dtype=np.int64)
        if labels.ndim != 1 or labels.size == 0:
            raise IncompatiblePartitionsError("assignments must be a non-empty 1-D array")
        k = int(self.num_clusters) if self.num_clusters else int(labels.max()) + 1
        if labels.min() < 0 or labels.max() >= k:
            raise IncompatiblePartitionsError(
                f"labels must lie in [0, {k}), got range [{labels.min()}, {labels.max()}]"
            )
        object.__setattr__(self, "assignments", labels)
        object.__setattr__(self, "num_clusters", k)

    def __len__(self) -> int:
        return int(self.assignments.size)


@dataclass(frozen=True)
class ContingencyTable:
    """Overlap counts n_ij between two partitions, with marginals."""

    counts: np.ndarray
    row_marginals: np.ndarray = field(default=None)  # type: ignore[assignment]
    col_marginals: np.ndarray = field(default=None)  # type: ignore[assignment]
    total: int = 0

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "row_marginals", counts.sum(axis=1))
        object.__setattr__(self, "col_marginals", counts.sum(axis=0))
        object.__setattr__(self, "total", int(counts.sum()))


@dataclass(frozen=True)
class PairCounts:
    """Object-pair agreement counts.

    a: pairs co-clustered in both partitions; b: co-clustered only in the
    first; c: co-clustered only in the second.
    """

    a: int
    b: int
    c: int


def _as_partition(p) -> Partition:
    return p if isinstance(p, Partition) else Partition(np.asarray(p))


def build_contingency(u, v) -> ContingencyTable:
    """Contingency table of two partitions of the same objects."""
    pu, pv = _as_partition(u), _as_partition(v)
    if len(pu) != len(pv):
        raise IncompatiblePartitionsError(
            f"partition lengths differ: {len(pu)} vs {len(pv)}"
        )
    flat = pu.assignments * pv.num_clusters + pv.assignments
    counts = np.bincount(flat, minlength=pu.num_clusters * pv.num_clusters)
    return ContingencyTable(counts.reshape(pu.num_clusters, pv.num_clusters))


def _choose2(n: int) -> int:
    return n * (n - 1) // 2


def pair_counts(table: ContingencyTable) -> PairCounts:
    """Exact pair counts a, b, c from a contingency table."""
    a = sum(_choose2(int(n)) for n in table.counts.ravel())
    row_pairs = sum(_choose2(int(n)) for n in table.row_marginals)
    col_pairs = sum(_choose2(int(n)) for n in table.col_marginals)
    return PairCounts(a=a, b=row_pairs - a, c=col_pairs - a)


def jaccard(p: PairCounts) -> float:
    """a / (a + b + c); 1 by convention when both partitions are all singletons."""
    denom = p.a + p.b + p.c
    if denom == 0:
        return 1.0
    return p.a / denom


def fowlkes_mallows(p: PairCounts) -> float:
    """a / sqrt((a + b) * (a + c)); 1 when a = b = c = 0."""
    if p.a + p.b == 0 or p.a + p.c == 0:
        return 1.0 if (p.b == 0 and p.c == 0) else 0.0
    return p.a / math.sqrt((p.a + p.b) * (p.a + p.c))


def adjusted_rand(table: ContingencyTable) -> float:
    """Adjusted Rand index; 1 when numerator and denominator both vanish."""
    n = table.total
    if n < 2:
        raise UndefinedIndexError(f"adjusted Rand needs n >= 2, got n = {n}")
    sum_cells = sum(_choose2(int(c)) for c in table.counts.ravel())
    sum_rows = sum(_choose2(int(c)) for c in table.row_marginals)
    sum_cols = sum(_choose2(int(c)) for c in table.col_marginals)
    total_pairs = _choose2(n)
    expected = sum_rows * sum_cols / total_pairs
    numerator = sum_cells - expected
    denominator = 0.5 * (sum_rows + sum_cols) - expected
    if numerator == 0.0 and denominator == 0.0:
        return 1.0
    return numerator / denominator


def nmi(table: ContingencyTable) -> float:
    """Normalized mutual information, I(U,V) / sqrt(H(U) * H(V)), in nats.

    Both partitions single-cluster: 1 (perfect trivial agreement). Exactly
    one side with zero entropy: 0 (mutual information is necessarily zero).
    """
    n = table.total
    if n < 1:
        raise UndefinedIndexError("nmi needs at least one object")

    def entropy(marginals: np.ndarray) -> float:
        probs = marginals[marginals > 0] / n
        return float(-(probs * np.log(probs)).sum())

    h_u = entropy(table.row_marginals)
    h_v = entropy(table.col_marginals)
    if h_u == 0.0 and h_v == 0.0:
        return 1.0
    if h_u == 0.0 or h_v == 0.0:
        return 0.0
    mutual = 0.0
    for i, row_total in enumerate(table.row_marginals):
        if row_total == 0:
            continue
        for j, n_ij in enumerate(table.counts[i]):
            if n_ij == 0:
                continue
            col_total = table.col_marginals[j]
            mutual += (n_ij / n) * math.log(n * n_ij / (row_total * col_total))
    return mutual / math.sqrt(h_u * h_v)


def score_partition(truth, predicted) -> dict[str, float]:
    """All four indices of a predicted partition against ground truth."""
    table = build_contingency(truth, predicted)
    pairs = pair_counts(table)
    return {
        "jaccard": jaccard(pairs),
        "ari": adjusted_rand(table),
        "fm": fowlkes_mallows(pairs),
        "nmi": nmi(table),
    }
