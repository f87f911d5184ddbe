"""Kruskal-Wallis rank test with a self-contained chi-square upper tail.

The H statistic uses mid-ranks for ties and the standard tie correction.
The p-value comes from the upper tail of the chi-square distribution,
evaluated through the regularized incomplete gamma function (series for
small arguments, Lentz continued fraction otherwise).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError

_GAMMA_EPS = 1e-15
_GAMMA_MAX_ITER = 500
_TINY = 1e-300


@dataclass(frozen=True)
class KruskalResult:
    h_statistic: float
    degrees_of_freedom: int
    p_value: float


def _lower_gamma_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by series, for x < a + 1."""
    term = 1.0 / a
    total = term
    denom = a
    for _ in range(_GAMMA_MAX_ITER):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < abs(total) * _GAMMA_EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))

def _upper_gamma_cf(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) by Lentz continued fraction."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def regularized_gamma_q(a: float, x: float) -> float:
    """Q(a, x) = 1 - P(a, x), accurate to ~1e-14 absolute."""
    if a <= 0.0:
        raise ValueError(f"need a > 0, got {a}")
    if x < 0.0:
        raise ValueError(f"need x >= 0, got {x}")
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _lower_gamma_series(a, x)
    return _upper_gamma_cf(a, x)


def chi_square_upper_tail(x: float, df: int) -> float:
    """P(X >= x) for X chi-square with df degrees of freedom."""
    if df < 1:
        raise ValueError(f"need df >= 1, got {df}")
    if x < 0.0:
        raise ValueError(f"need x >= 0, got {x}")
    return regularized_gamma_q(df / 2.0, x / 2.0)


def _midranks(pooled: np.ndarray) -> tuple[np.ndarray, float]:
    """Mid-ranks of the pooled sample and the tie-correction sum (t^3 - t)."""
    order = np.argsort(pooled, kind="stable")
    ranks = np.empty(pooled.size, dtype=np.float64)
    tie_sum = 0.0
    i = 0
    sorted_vals = pooled[order]
    while i < pooled.size:
        j = i
        while j + 1 < pooled.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        mid = 0.5 * (i + j) + 1.0
        ranks[order[i : j + 1]] = mid
        t = j - i + 1
        if t > 1:
            tie_sum += t**3 - t
        i = j + 1
    return ranks, tie_sum


def kruskal_wallis(groups: list) -> KruskalResult:
    """Kruskal-Wallis one-way rank test across two or more groups."""
    arrays = [np.asarray(g, dtype=np.float64).ravel() for g in groups]
    if len(arrays) < 2:
        raise DegenerateDataError(f"need >= 2 groups, got {len(arrays)}")
    if any(a.size == 0 for a in arrays):
        raise DegenerateDataError("every group must be non-empty")
    pooled = np.concatenate(arrays)
    n = pooled.size
    ranks, tie_sum = _midranks(pooled)
    correction = 1.0 - tie_sum / (n**3 - n)
    if correction == 0.0:
        raise DegenerateDataError("all values identical; rank test undefined")
    grand_mean = (n + 1) / 2.0
    h = 0.0
    start = 0
    for a in arrays:
        group_ranks = ranks[start : start + a.size]
        start += a.size
        h += a.size * (group_ranks.mean() - grand_mean) ** 2
    h *= 12.0 / (n * (n + 1))
    h /= correction
    df = len(arrays) - 1
    return KruskalResult(
        h_statistic=float(h),
        degrees_of_freedom=df,
        p_value=chi_square_upper_tail(float(h), df),
    )
