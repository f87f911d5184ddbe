"""Deterministic seed derivation.

Every random stream in the package is keyed by a 64-bit seed derived from a
master seed plus the identity of the work item (dataset cell, class index,
algorithm, draw index, ...). Derivation is a SHA-256 hash of the component
tuple, so results are independent of scheduling order and stable across
processes and platforms.
"""

from __future__ import annotations

import hashlib

import numpy as np

Seedable = int | float | str


def derive_seed(*parts: Seedable) -> int:
    """Hash a tuple of identifying components down to a 64-bit seed."""
    digest = hashlib.sha256(repr(tuple(parts)).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def rng_for(*parts: Seedable) -> np.random.Generator:
    """A fresh PCG64 generator seeded from the derived 64-bit seed."""
    return np.random.default_rng(derive_seed(*parts))


def data_seed(array: np.ndarray, *parts: Seedable) -> int:
    """A 64-bit seed keyed by an array's contents (plus optional context).

    Used where a random choice must be a pure function of the data itself,
    e.g. the subsample behind the automatic spectral kernel width.
    """
    h = hashlib.sha256()
    h.update(repr(tuple(parts)).encode("utf-8"))
    h.update(np.ascontiguousarray(array).tobytes())
    return int.from_bytes(h.digest()[:8], "little")
