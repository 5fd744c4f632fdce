"""Summary statistics over similarity matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ArgError, DomainError

BLOCK_SIZES = range(3, 8)


def _values(sim) -> np.ndarray:
    v = np.asarray(getattr(sim, "values", sim), dtype=np.float64)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {v.shape}")
    return v


def offdiag_rows(values: np.ndarray) -> np.ndarray:
    """Rows of ``values`` with the diagonal entry removed (L x L-1)."""
    n = values.shape[0]
    mask = ~np.eye(n, dtype=bool)
    return values[mask].reshape(n, n - 1)


def gini_coefficient(x) -> float:
    """Sorted-rank Gini of a non-negative vector: sum((2i-n-1) x_(i)) / (n sum x)."""
    x = np.sort(np.asarray(x, dtype=np.float64))
    n = x.size
    total = x.sum()
    if total <= 0:
        raise DomainError("Gini needs a positive total")
    # Pair rank k with n+1-k: sum((2i-n-1) x_(i)) = sum((n+1-2k)(x_(n+1-k) - x_(k))),
    # which is exactly zero for equal values.
    half = n // 2
    k = np.arange(1, half + 1)
    spread = x[::-1][:half] - x[:half]
    return float(np.dot(n + 1 - 2 * k, spread) / (n * total))


def gini(sim) -> float:
    """Mean row-wise Gini of the diagonal-free, row-normalised matrix."""
    values = _values(sim)
    if values.shape[0] < 3:
        raise ArgError("gini needs at least 3 layers")
    rows = offdiag_rows(values)
    if (rows < 0).any():
        raise DomainError("similarity matrix has negative off-diagonal entries")
    sums = rows.sum(axis=1)
    if (sums <= 0).any():
        raise DomainError(f"row {int(np.argmin(sums))} sums to zero")
    shares = rows / sums[:, None]
    return float(np.mean([gini_coefficient(r) for r in shares]))


@dataclass(frozen=True)
class BlockProfile:
    block_size: int
    start_indices: np.ndarray
    averages: np.ndarray


def block_profile(sim, block_size: int) -> BlockProfile:
    """Average off-diagonal score of every k x k block along the diagonal."""
    values = _values(sim)
    n = values.shape[0]
    if block_size not in BLOCK_SIZES or block_size > n:
        raise ArgError(f"block size must be in 3..7 and at most {n}, got {block_size}")
    k = block_size
    starts = np.arange(n - k + 1)
    mask = ~np.eye(k, dtype=bool)
    averages = np.array([values[s:s + k, s:s + k][mask].mean() for s in starts])
    return BlockProfile(k, starts, averages)


@dataclass(frozen=True)
class DistanceProfile:
    distances: np.ndarray
    mean_sim: np.ndarray
    std_sim: np.ndarray


def distance_profile(sim) -> DistanceProfile:
    """Mean and population std of similarity at each layer distance d >= 1."""
    values = _values(sim)
    n = values.shape[0]
    if n < 2:
        raise ArgError("distance profile needs at least 2 layers")
    distances = np.arange(1, n)
    diags = [np.diagonal(values, d) for d in distances]
    return DistanceProfile(distances, np.array([d.mean() for d in diags]),
                           np.array([d.std() for d in diags]))
