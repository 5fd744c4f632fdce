from __future__ import annotations

from ..errors import UsageError
from .gumbel import gumbel_fit_location
from .kernel import DEFAULT_TILE, as_matrix, cross_reduce, snap_unit
from .types import IndexKind, SimilarityScore


def docs(x, y, aggregate: str = "max", tile: int = DEFAULT_TILE,
         workers: int | None = None) -> SimilarityScore:
    """DOCS similarity between two oriented matrices.

    Each column's largest |cosine| against the other matrix is collected in
    both directions, a Gumbel distribution is fitted to each vector, and the
    two fitted locations are averaged. With ``aggregate="mean"`` the per-column
    statistic is the mean |cosine| instead (the DOCS_MEAN ablation).
    """
    if aggregate not in ("max", "mean"):
        raise UsageError(f"aggregate must be 'max' or 'mean', got {aggregate!r}")
    x, y = as_matrix(x), as_matrix(y)
    s_x, s_y = cross_reduce(x, y, aggregate, tile, workers)
    if aggregate == "max":
        s_x, s_y = snap_unit(s_x, x.shape[0]), snap_unit(s_y, x.shape[0])
    fit_x = gumbel_fit_location(s_x)
    fit_y = gumbel_fit_location(s_y)
    kind = IndexKind.DOCS if aggregate == "max" else IndexKind.DOCS_MEAN
    meta = {"fit_x": fit_x, "fit_y": fit_y, "unequal_columns": x.shape[1] != y.shape[1]}
    return SimilarityScore(kind, (fit_x.location_u + fit_y.location_u) / 2.0, meta)


def docs_vectors(x, y, aggregate: str = "max", tile: int = DEFAULT_TILE,
                 workers: int | None = None):
    """The two per-column statistic vectors DOCS fits (for histograms)."""
    x = as_matrix(x)
    s_x, s_y = cross_reduce(x, y, aggregate, tile, workers)
    if aggregate == "max":
        s_x, s_y = snap_unit(s_x, x.shape[0]), snap_unit(s_y, x.shape[0])
    return s_x, s_y
