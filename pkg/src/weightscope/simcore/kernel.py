"""Tiled max/mean of |cosine| between the columns of two matrices.

Columns are normalised tile by tile in float64 against norms computed once,
and the full cross-cosine matrix is never held in memory: each X tile
sweeps every Y tile in a fixed order and keeps running row statistics,
plus per-X-tile column statistics that are merged in tile order. Results
are therefore bitwise reproducible for a fixed tile size whatever the
number of worker threads.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..errors import DimError, NonFiniteError, StateError, ZeroColumnError
from .types import CosineMaxVector

DEFAULT_TILE = 512
_EPS = np.finfo(np.float64).eps
_TINY = 1e-150


def default_workers() -> int:
    env = os.environ.get("WEIGHTSCOPE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def as_matrix(a) -> np.ndarray:
    data = getattr(a, "data", a)
    if getattr(a, "oriented", True) is False:
        raise StateError("matrix must be oriented before similarity computation")
    data = np.asarray(data)
    if data.ndim != 2:
        raise DimError(f"expected a 2-D matrix, got shape {data.shape}")
    return data


def column_norms(a: np.ndarray, tile: int = DEFAULT_TILE, which: str = "") -> np.ndarray:
    """Euclidean column norms accumulated in float64; rejects zero columns."""
    m = a.shape[1]
    norms = np.empty(m)
    for lo in range(0, m, tile):
        t = np.asarray(a[:, lo:lo + tile], dtype=np.float64)
        norms[lo:lo + tile] = np.sqrt(np.einsum("ij,ij->j", t, t))
    # squares of tiny entries underflow; rescale those columns by their max
    for j in np.flatnonzero(norms < _TINY):
        col = np.asarray(a[:, j], dtype=np.float64)
        peak = np.abs(col).max()
        norms[j] = peak * np.sqrt(np.sum((col / peak) ** 2)) if peak > 0 else 0.0
    if not np.isfinite(norms).all():
        raise NonFiniteError(f"non-finite entries in {which or 'matrix'}")
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ZeroColumnError(int(zero[0]), which)
    return norms


def _unit_tile(a, norms, lo, hi) -> np.ndarray:
    return np.asarray(a[:, lo:hi], dtype=np.float64) / norms[lo:hi]


def cross_reduce(x, y, reduce: str = "max", tile: int = DEFAULT_TILE,
                 workers: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Row and column statistics of ``|cos(x_j, y_k)|``.

    Returns ``(row, col)`` where ``row[j]`` reduces over all columns of ``y``
    and ``col[k]`` over all columns of ``x``; ``reduce`` is ``"max"`` or
    ``"mean"``.
    """
    x, y = as_matrix(x), as_matrix(y)
    if x.shape[0] != y.shape[0]:
        raise DimError(f"row dimensions differ: {x.shape[0]} vs {y.shape[0]}")
    if reduce not in ("max", "mean"):
        raise ValueError(f"reduce must be 'max' or 'mean', got {reduce!r}")
    if tile < 1:
        raise ValueError("tile must be positive")
    mx, my = x.shape[1], y.shape[1]
    nx, ny = column_norms(x, tile, "X"), column_norms(y, tile, "Y")
    use_max = reduce == "max"

    def sweep(lo: int):
        hi = min(lo + tile, mx)
        xt = _unit_tile(x, nx, lo, hi)
        row = np.zeros(hi - lo)
        col = np.zeros(my)
        for ylo in range(0, my, tile):
            yhi = min(ylo + tile, my)
            c = np.abs(xt.T @ _unit_tile(y, ny, ylo, yhi))
            if use_max:
                np.maximum(row, c.max(axis=1), out=row)
                col[ylo:yhi] = c.max(axis=0)
            else:
                row += c.sum(axis=1)
                col[ylo:yhi] = c.sum(axis=0)
        return row, col

    starts = range(0, mx, tile)
    workers = default_workers() if workers is None else max(1, workers)
    if workers == 1 or len(starts) == 1:
        parts = [sweep(lo) for lo in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(sweep, starts))

    row = np.concatenate([p[0] for p in parts])
    col = parts[0][1]
    for _, c in parts[1:]:
        col = np.maximum(col, c) if use_max else col + c
    if not use_max:
        row /= my
        col /= mx
    return row, col


def snap_unit(values: np.ndarray, n: int) -> np.ndarray:
    """Clamp |cos| maxima into [0, 1].

    Values within the forward error bound ``n * eps`` of 1 are set to
    exactly 1: a unit-vector dot product cannot resolve them from perfect
    alignment.
    """
    out = np.minimum(values, 1.0)
    out[out >= 1.0 - n * _EPS] = 1.0
    return out


def max_cos_sim(a, b, tile: int = DEFAULT_TILE, workers: int | None = None) -> CosineMaxVector:
    """For each column of ``a``, the largest |cosine| against any column of ``b``."""
    a = as_matrix(a)
    row, _ = cross_reduce(a, b, "max", tile, workers)
    return CosineMaxVector(snap_unit(row, a.shape[0]), as_matrix(b).shape[1])
