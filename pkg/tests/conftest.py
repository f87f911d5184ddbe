"""Shared helpers: independent oracles and small corpus builders.

The oracles deliberately take different computational routes than the
library (object-pair enumeration instead of contingency binomials, Counter
entropies instead of table marginals) so agreement is meaningful.
"""

from __future__ import annotations

import math
from collections import Counter

import numpy as np
import pytest

from clusterbench.datagen import Dataset, DatasetSpec, generate_dataset
from clusterbench.seeds import derive_seed


# ---------------------------------------------------------------------------
# metric oracles
# ---------------------------------------------------------------------------


def enumerate_pairs(u, v) -> tuple[int, int, int, int]:
    """Classify every object pair: both-same, u-only, v-only, neither."""
    u = list(u)
    v = list(v)
    a = b = c = d = 0
    for i in range(len(u)):
        for j in range(i + 1, len(u)):
            same_u = u[i] == u[j]
            same_v = v[i] == v[j]
            if same_u and same_v:
                a += 1
            elif same_u:
                b += 1
            elif same_v:
                c += 1
            else:
                d += 1
    return a, b, c, d


def oracle_jaccard(u, v) -> float:
    a, b, c, _ = enumerate_pairs(u, v)
    return 1.0 if a + b + c == 0 else a / (a + b + c)


def oracle_fowlkes_mallows(u, v) -> float:
    a, b, c, _ = enumerate_pairs(u, v)
    if a + b == 0 or a + c == 0:
        return 1.0 if (b == 0 and c == 0) else 0.0
    return a / math.sqrt((a + b) * (a + c))


def oracle_ari(u, v) -> float:
    """Hubert-Arabie closed form from the four pair classes."""
    a, b, c, d = enumerate_pairs(u, v)
    numerator = 2.0 * (a * d - b * c)
    denominator = (a + b) * (b + d) + (a + c) * (c + d)
    return 1.0 if denominator == 0 else numerator / denominator


def _entropy(labels) -> float:
    n = len(labels)
    return -sum((cnt / n) * math.log(cnt / n) for cnt in Counter(labels).values())


def oracle_nmi(u, v) -> float:
    u, v = list(u), list(v)
    h_u, h_v = _entropy(u), _entropy(v)
    if h_u == 0.0 and h_v == 0.0:
        return 1.0
    if h_u == 0.0 or h_v == 0.0:
        return 0.0
    h_uv = _entropy(list(zip(u, v)))
    return (h_u + h_v - h_uv) / math.sqrt(h_u * h_v)


# ---------------------------------------------------------------------------
# corpus builders
# ---------------------------------------------------------------------------


def make_corpus(num_classes, num_features, objects_per_class, realizations,
                alpha, seed=11) -> list[Dataset]:
    return [
        generate_dataset(DatasetSpec(
            num_classes=num_classes,
            num_features=num_features,
            objects_per_class=objects_per_class,
            alpha=alpha,
            seed=derive_seed(seed, num_classes, num_features, objects_per_class, r),
            realization_index=r,
        ))
        for r in range(realizations)
    ]


def two_blob_data(n_per=40, gap=20.0, num_features=2, seed=0):
    """Two spherical blobs far apart relative to their spread."""
    rng = np.random.default_rng(seed)
    a = rng.normal(0.0, 1.0, (n_per, num_features))
    b = rng.normal(gap, 1.0, (n_per, num_features))
    x = np.vstack([a, b])
    y = np.repeat([0, 1], n_per)
    return x, y


def concentric_rings(n_per=100, radii=(1.0, 3.0), noise=0.02, seed=0):
    rng = np.random.default_rng(seed)
    blocks = []
    for r in radii:
        theta = rng.uniform(0.0, 2.0 * np.pi, n_per)
        ring = np.c_[np.cos(theta), np.sin(theta)] * r
        blocks.append(ring + rng.normal(0.0, noise, ring.shape))
    x = np.vstack(blocks)
    y = np.repeat(np.arange(len(radii)), n_per)
    return x, y


@pytest.fixture(scope="session")
def overlapping_ten_class_corpus():
    """DB10C10F-like data with heavy class overlap (UPGMA degenerates here)."""
    return make_corpus(10, 10, 50, 10, alpha=1.4)
