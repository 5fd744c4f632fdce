"""Closed-form baseline indices: linear regression, CCA, SVCCA, linear HSIC/CKA.

All are evaluated exactly as printed for weight matrices, without the
column centering used in the representation-similarity literature.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimError, UsageError
from .kernel import as_matrix
from .linalg import left_singular_basis, orthonormal_basis, singular_values
from .types import IndexKind, SimilarityScore


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(as_matrix(x), dtype=np.float64)
    y = np.asarray(as_matrix(y), dtype=np.float64)
    if x.shape[0] != y.shape[0]:
        raise DimError(f"row dimensions differ: {x.shape[0]} vs {y.shape[0]}")
    return x, y


def linreg(x, y) -> float:
    """||Q_Y^T X||_F^2 / ||X||_F^2: share of X's energy inside span(Y)."""
    qy = orthonormal_basis(y)
    return float(np.sum((qy.T @ x) ** 2) / np.sum(x * x))


def _basis_ratio(qx: np.ndarray, qy: np.ndarray, nuclear: bool) -> float:
    denom = min(qx.shape[1], qy.shape[1])
    if denom == 0:
        raise DimError("a matrix has numerical rank 0")
    cross = qy.T @ qx
    num = singular_values(cross).sum() if nuclear else np.sum(cross * cross)
    return float(num / denom)


def _cross_frobenius_sq(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """(||X^T Y||_F^2, ||X^T X||_F, ||Y^T Y||_F) via the smaller Gram side."""
    n = x.shape[0]
    if n <= max(x.shape[1], y.shape[1]):
        gx, gy = x @ x.T, y @ y.T
        return float(np.sum(gx * gy)), float(np.linalg.norm(gx)), float(np.linalg.norm(gy))
    c = x.T @ y
    return (float(np.sum(c * c)), float(np.linalg.norm(x.T @ x)),
            float(np.linalg.norm(y.T @ y)))


def baseline_index(kind: IndexKind, x, y, svcca_threshold: float = 0.99) -> SimilarityScore:
    kind = IndexKind(kind)
    if kind in (IndexKind.DOCS, IndexKind.DOCS_MEAN):
        raise UsageError("DOCS kinds are computed by docs(), not baseline_index()")
    x, y = _pair(x, y)
    meta: dict = {}
    if kind is IndexKind.LINREG:
        value = linreg(x, y)
    elif kind in (IndexKind.CCA_R2, IndexKind.CCA_NUCLEAR):
        qx, qy = orthonormal_basis(x), orthonormal_basis(y)
        meta["ranks"] = (qx.shape[1], qy.shape[1])
        value = _basis_ratio(qx, qy, nuclear=kind is IndexKind.CCA_NUCLEAR)
    elif kind in (IndexKind.SVCCA_R2, IndexKind.SVCCA_NUCLEAR):
        ux = left_singular_basis(x, svcca_threshold)
        uy = left_singular_basis(y, svcca_threshold)
        meta["kept"] = (ux.shape[1], uy.shape[1])
        value = _basis_ratio(ux, uy, nuclear=kind is IndexKind.SVCCA_NUCLEAR)
    elif kind is IndexKind.LINEAR_HSIC:
        n = x.shape[0]
        if n < 2:
            raise DimError("linear HSIC needs at least two rows")
        num, _, _ = _cross_frobenius_sq(x, y)
        value = num / (n - 1) ** 2
    else:
        num, nx, ny = _cross_frobenius_sq(x, y)
        value = num / (nx * ny)
    return SimilarityScore(kind, float(value), meta)
