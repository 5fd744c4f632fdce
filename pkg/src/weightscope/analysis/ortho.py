"""Column-orthogonality diagnostics and the perturbed-identity reference family."""

from __future__ import annotations

import numpy as np

from .. import rng as _rng
from ..simcore import DEFAULT_TILE, cross_reduce
from ..simcore.kernel import as_matrix


def offdiag_avg_cos(x, tile: int = DEFAULT_TILE, workers: int | None = None) -> float:
    """Mean |cosine| over all ordered pairs of distinct columns."""
    x = as_matrix(x)
    m = x.shape[1]
    if m < 2:
        raise ValueError("need at least two columns")
    row_mean, _ = cross_reduce(x, x, "mean", tile, workers)
    # self-pairs contribute |cos| = 1 to every row sum
    total = float(np.sum(row_mean * m)) - m
    return max(total, 0.0) / (m * (m - 1))


def make_m_theta(n: int, theta: float, seed: int, m: int | None = None) -> np.ndarray:
    """I + theta * v 1^T with v ~ N(0, 1) drawn from the seeded Philox stream.

    ``m`` gives a rectangular n x m variant (identity padded with zeros) for
    matching non-square weights; it defaults to ``n``.
    """
    m = n if m is None else m
    if n < 1 or m < 1:
        raise ValueError("dimensions must be positive")
    v = _rng.normal(_rng.generator(seed), n)
    return np.eye(n, m) + theta * np.outer(v, np.ones(m))
