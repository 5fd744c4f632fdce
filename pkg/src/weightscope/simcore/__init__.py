"""Similarity indices between weight matrices."""

from __future__ import annotations

from dataclasses import dataclass

from .baselines import baseline_index
from .docs import docs, docs_vectors
from .gumbel import gumbel_fit_location, gumbel_pdf
from .kernel import DEFAULT_TILE, column_norms, cross_reduce, max_cos_sim
from .linalg import hadamard, left_singular_basis, orthonormal_basis, singular_values
from .types import COMPARED_KINDS, CosineMaxVector, GumbelFit, IndexKind, SimilarityScore


@dataclass(frozen=True)
class IndexParams:
    svcca_threshold: float = 0.99
    tile: int = DEFAULT_TILE
    workers: int | None = None

    def __post_init__(self):
        if not 0.0 < self.svcca_threshold <= 1.0:
            raise ValueError(f"svcca_threshold must lie in (0, 1], got {self.svcca_threshold}")


def compute_index(kind: IndexKind, x, y, params: IndexParams = IndexParams()) -> SimilarityScore:
    """Evaluate any of the nine index kinds on a pair of oriented matrices."""
    kind = IndexKind(kind)
    if kind is IndexKind.DOCS:
        return docs(x, y, "max", params.tile, params.workers)
    if kind is IndexKind.DOCS_MEAN:
        return docs(x, y, "mean", params.tile, params.workers)
    return baseline_index(kind, x, y, params.svcca_threshold)


__all__ = [
    "COMPARED_KINDS", "CosineMaxVector", "DEFAULT_TILE", "GumbelFit", "IndexKind",
    "IndexParams", "SimilarityScore", "baseline_index", "column_norms", "compute_index",
    "cross_reduce", "docs", "docs_vectors", "gumbel_fit_location", "gumbel_pdf", "hadamard",
    "left_singular_basis", "max_cos_sim", "orthonormal_basis", "singular_values",
]
