"""Pairwise similarity matrices over layers, experts and models."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..checkpoint import CheckpointIndex, Role, RoleTag, load_oriented
from ..errors import ArgError, DimError
from ..simcore import IndexKind, IndexParams, compute_index

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimilarityMatrix:
    values: np.ndarray
    kind: IndexKind
    role: RoleTag | None = None
    model_id: str = ""
    labels: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(self.values.shape[0])))

    @property
    def layer_count(self) -> int:
        return self.values.shape[0]


def pairwise_matrix(count: int, load: Callable[[int], np.ndarray], kind: IndexKind,
                    params: IndexParams = IndexParams()) -> np.ndarray:
    """Fill ``values[i, j] = kind(load(i), load(j))``.

    Traverses rows in order, holding only row ``i`` and column ``j`` matrices.
    Symmetric kinds evaluate ``i <= j`` and copy the mirror.
    """
    kind = IndexKind(kind)
    values = np.empty((count, count))
    for i in range(count):
        xi = load(i)
        cols = range(i, count) if kind.symmetric else range(count)
        for j in cols:
            xj = xi if j == i else load(j)
            values[i, j] = compute_index(kind, xi, xj, params).value
            if kind.symmetric:
                values[j, i] = values[i, j]
        log.debug("%s row %d/%d done", kind.value, i + 1, count)
    return values


def similarity_matrix(matrices: Sequence[np.ndarray], kind: IndexKind,
                      params: IndexParams = IndexParams(), role: RoleTag | None = None,
                      model_id: str = "") -> SimilarityMatrix:
    """Similarity matrix over in-memory oriented matrices."""
    values = pairwise_matrix(len(matrices), lambda i: matrices[i], kind, params)
    return SimilarityMatrix(values, IndexKind(kind), role, model_id)


def layer_heatmap(index: CheckpointIndex, role: RoleTag, kind: IndexKind,
                  params: IndexParams = IndexParams(), compute_dtype: str = "f32",
                  model_id: str = "") -> SimilarityMatrix:
    """Layer-by-layer similarity of one weight role across a checkpoint."""
    role = RoleTag.parse(role) if isinstance(role, str) else role
    for layer in range(index.num_layers):
        index.slot(layer, role)  # raise early, naming the missing slot
    values = pairwise_matrix(
        index.num_layers, lambda i: load_oriented(index, i, role, compute_dtype), kind, params)
    return SimilarityMatrix(values, IndexKind(kind), role, model_id)


def expert_heatmap(index: CheckpointIndex, layer: int, expert_role: Role, kind: IndexKind,
                   params: IndexParams = IndexParams(), compute_dtype: str = "f32",
                   model_id: str = "") -> SimilarityMatrix:
    """Expert-by-expert similarity for one MoE role within a layer."""
    expert_role = Role(expert_role)
    if not expert_role.is_expert:
        raise ArgError(f"{expert_role.value} is not an expert role")
    experts = index.experts(layer, expert_role)
    if len(experts) < 2:
        raise ArgError(f"layer {layer} has {len(experts)} {expert_role.value} expert(s); need 2")
    load = lambda i: load_oriented(index, layer, RoleTag(expert_role, experts[i]), compute_dtype)
    values = pairwise_matrix(len(experts), load, kind, params)
    return SimilarityMatrix(values, IndexKind(kind), RoleTag(expert_role, experts[0]),
                            model_id, tuple(experts))


def _check_aligned(indexes: Sequence[CheckpointIndex], role: RoleTag) -> None:
    counts = {ix.num_layers for ix in indexes}
    if len(counts) != 1:
        raise DimError(f"checkpoints have different layer counts: {sorted(counts)}")
    for layer in range(indexes[0].num_layers):
        shapes = {ix.slot(layer, role).shape for ix in indexes}
        if len(shapes) != 1:
            raise DimError(f"layer {layer} {role}: shapes differ across checkpoints {shapes}")


def cross_model_series(index_a: CheckpointIndex, index_b: CheckpointIndex, role: RoleTag,
                       kind: IndexKind, params: IndexParams = IndexParams(),
                       compute_dtype: str = "f32") -> np.ndarray:
    """Per-layer similarity between the same slot in two checkpoints."""
    role = RoleTag.parse(role) if isinstance(role, str) else role
    _check_aligned([index_a, index_b], role)
    return np.array([
        compute_index(kind, load_oriented(index_a, layer, role, compute_dtype),
                      load_oriented(index_b, layer, role, compute_dtype), params).value
        for layer in range(index_a.num_layers)
    ])


@dataclass(frozen=True)
class RatioRow:
    layer: int
    sim_ab: float
    sim_ac: float
    ratio: float | None  # None when sim_ac <= 0


@dataclass(frozen=True)
class RatioReport:
    model_ids: tuple[str, str, str]
    role: RoleTag
    kind: IndexKind
    rows: list[RatioRow] = field(default_factory=list)
    unnormalized: bool = False  # LINEAR_HSIC ratios mix model scales

    @property
    def ratios(self) -> np.ndarray:
        return np.array([np.nan if r.ratio is None else r.ratio for r in self.rows])


def ratio_rows(sim_ab: Sequence[float], sim_ac: Sequence[float]) -> list[RatioRow]:
    return [RatioRow(layer, float(ab), float(ac), float(ab / ac) if ac > 0 else None)
            for layer, (ab, ac) in enumerate(zip(sim_ab, sim_ac))]


def similarity_ratio(index_a: CheckpointIndex, index_b: CheckpointIndex,
                     index_c: CheckpointIndex, role: RoleTag, kind: IndexKind,
                     params: IndexParams = IndexParams(), compute_dtype: str = "f32",
                     model_ids: tuple[str, str, str] = ("A", "B", "C")) -> RatioReport:
    """Per-layer ratio of sim(A, B) to sim(A, C)."""
    role = RoleTag.parse(role) if isinstance(role, str) else role
    kind = IndexKind(kind)
    _check_aligned([index_a, index_b, index_c], role)
    ab = cross_model_series(index_a, index_b, role, kind, params, compute_dtype)
    ac = cross_model_series(index_a, index_c, role, kind, params, compute_dtype)
    return RatioReport(tuple(model_ids), role, kind, ratio_rows(ab, ac),
                       unnormalized=kind is IndexKind.LINEAR_HSIC)
