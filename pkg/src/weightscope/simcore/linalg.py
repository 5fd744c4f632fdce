"""Dense linear-algebra helpers: orthonormal bases, singular values, Hadamard."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from ..errors import ArgError, NonFiniteError

_EPS = np.finfo(np.float64).eps


def _finite64(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if not np.isfinite(x).all():
        raise NonFiniteError("matrix has NaN/Inf entries")
    return x


def rank_tolerance(shape: tuple[int, int], top: float) -> float:
    return max(shape) * _EPS * top


def orthonormal_basis(x) -> np.ndarray:
    """Orthonormal basis (n x r) for the column space of ``x``.

    Uses QR with column pivoting; diagonal entries of R at or below
    ``max(n, m) * eps * |R[0, 0]|`` mark the numerical rank.
    """
    x = _finite64(x)
    if x.size == 0:
        return np.zeros((x.shape[0], 0))
    q, r, _ = scipy.linalg.qr(x, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return q[:, :0]
    rank = int(np.count_nonzero(diag > rank_tolerance(x.shape, diag[0])))
    return q[:, :rank]


def singular_values(x) -> np.ndarray:
    """Singular values in descending order (LAPACK divide-and-conquer SVD)."""
    x = _finite64(x)
    if x.size == 0:
        return np.zeros(0)
    return np.linalg.svd(x, compute_uv=False)


def left_singular_basis(x, threshold: float = 1.0) -> np.ndarray:
    """Leading left singular vectors whose cumulative variance reaches ``threshold``.

    Variance is the squared singular value. Directions below the numerical
    rank are never kept, so ``threshold=1`` returns the full rank.
    """
    if not 0.0 < threshold <= 1.0:
        raise ArgError(f"threshold must lie in (0, 1], got {threshold}")
    x = _finite64(x)
    u, s, _ = np.linalg.svd(x, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return u[:, :0]
    rank = int(np.count_nonzero(s > rank_tolerance(x.shape, s[0])))
    if threshold >= 1.0:
        return u[:, :rank]
    var = s[:rank] ** 2
    frac = np.cumsum(var) / var.sum()
    keep = int(np.searchsorted(frac, threshold, side="left")) + 1
    return u[:, :min(keep, rank)]


def hadamard(m: int) -> np.ndarray:
    """Sylvester Hadamard matrix of order ``m`` (a power of two), as int64."""
    if not isinstance(m, (int, np.integer)) or m < 1 or m & (m - 1):
        raise ArgError(f"Hadamard order must be a power of two, got {m}")
    h = np.ones((1, 1), dtype=np.int64)
    while h.shape[0] < m:
        h = np.block([[h, h], [h, -h]])
    return h
