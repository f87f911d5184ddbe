"""Dense symmetric eigendecomposition and PSD square roots.

Everything here operates on full symmetric matrices at benchmark scale
(affinity matrices up to a few thousand rows, covariance factors up to a few
hundred). The eigensolver is a cyclic Jacobi iteration compiled with numba;
it is unconditionally robust for symmetric input and fast enough for the
corpus sizes this package targets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConvergenceFailureError, InvalidDimensionError, NotPSDError

# Convergence: off-diagonal Frobenius norm relative to the full Frobenius norm.
OFF_DIAGONAL_TOL = 1e-12
MAX_SWEEPS = 100


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral decomposition of a symmetric matrix.

    values are sorted ascending; vectors holds the matching orthonormal
    eigenvectors as columns.
    """

    values: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.shape[0]


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Exactly symmetric copy of `a`: the upper triangle is mirrored down."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidDimensionError(f"expected a square matrix, got shape {a.shape}")
    upper = np.triu(a)
    return upper + np.triu(a, 1).T


@njit(cache=True)
def _jacobi_sweeps(a, v, off_tol, max_sweeps):  # pragma: no cover - compiled
    n = a.shape[0]
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += a[p, q] * a[p, q]
        if np.sqrt(2.0 * off) <= off_tol:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for i in range(n):
                    aip = a[i, p]
                    aiq = a[i, q]
                    a[i, p] = c * aip - s * aiq
                    a[i, q] = s * aip + c * aiq
                for i in range(n):
                    api = a[p, i]
                    aqi = a[q, i]
                    a[p, i] = c * api - s * aqi
                    a[q, i] = s * api + c * aqi
                for i in range(n):
                    vip = v[i, p]
                    viq = v[i, q]
                    v[i, p] = c * vip - s * viq
                    v[i, q] = s * vip + c * viq
    return -1


def eigh(a: np.ndarray, max_sweeps: int = MAX_SWEEPS) -> EigenDecomposition:
    """Full eigendecomposition of a symmetric matrix via cyclic Jacobi.

    The input is mirrored to exact symmetry first. Rotations sweep the upper
    triangle cyclically until the off-diagonal Frobenius norm falls below
    OFF_DIAGONAL_TOL times the Frobenius norm of the input.

    Raises ConvergenceFailureError if the sweep budget is exhausted.
    """
    m = symmetrize(a)
    n = m.shape[0]
    if n == 0:
        raise InvalidDimensionError("matrix must have dim >= 1")
    if n == 1:
        return EigenDecomposition(values=m[0, :1].copy(), vectors=np.ones((1, 1)))
    off_tol = OFF_DIAGONAL_TOL * np.linalg.norm(m, "fro")
    work = np.ascontiguousarray(m)
    vectors = np.eye(n)
    sweeps = _jacobi_sweeps(work, vectors, off_tol, max_sweeps)
    if sweeps < 0:
        raise ConvergenceFailureError(
            f"Jacobi iteration did not converge in {max_sweeps} sweeps (dim {n})"
        )
    values = np.diag(work).copy()
    order = np.argsort(values, kind="stable")
    return EigenDecomposition(values=values[order], vectors=vectors[:, order])


def psd_sqrt(a: np.ndarray) -> np.ndarray:
    """Symmetric square root S of a PSD matrix, with S @ S.T == a.

    Eigenvalues within -1e-8 * max(diagonal) of zero are clipped to zero;
    anything more negative raises NotPSDError.
    """
    m = symmetrize(a)
    decomp = eigh(m)
    max_diag = max(float(np.max(np.diag(m))), 0.0)
    floor = -1e-8 * max_diag
    min_val = float(decomp.values[0])
    if min_val < floor:
        raise NotPSDError(
            f"minimum eigenvalue {min_val:.3e} below tolerance {floor:.3e}"
        )
    clipped = np.clip(decomp.values, 0.0, None)
    return (decomp.vectors * np.sqrt(clipped)) @ decomp.vectors.T
