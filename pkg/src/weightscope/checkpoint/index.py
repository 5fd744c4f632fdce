"""Checkpoint index, matrix loading and orientation."""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from ..errors import (DuplicateTensorError, NonFiniteError, ParseError, ShapeError,
                      SlotNotFoundError, StateError)
from .formats import TensorRecord, scan_sources
from .naming import resolve_naming
from .roles import Role, RoleTag

_COMPUTE_DTYPES = {"f32": np.float32, "f64": np.float64}
_STORED_DTYPES = {"f64": "<f8", "f32": "<f4", "f16": "<f2", "bf16": "<u2"}
_FINITE_CHUNK = 1 << 22  # elements checked per pass


@dataclass(frozen=True)
class CheckpointIndex:
    records: tuple[TensorRecord, ...]
    layer_map: Mapping[tuple[int, RoleTag], str]
    num_layers: int
    _by_name: Mapping[str, TensorRecord] = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "layer_map", MappingProxyType(dict(self.layer_map)))
        object.__setattr__(self, "_by_name",
                           MappingProxyType({r.name: r for r in self.records}))

    def record(self, name: str) -> TensorRecord:
        return self._by_name[name]

    def slot(self, layer: int, role: RoleTag) -> TensorRecord:
        try:
            return self._by_name[self.layer_map[(layer, role)]]
        except KeyError:
            raise SlotNotFoundError(f"no tensor for layer {layer}, role {role}") from None

    def roles(self) -> list[RoleTag]:
        return sorted({role for _, role in self.layer_map}, key=RoleTag.sort_key)

    def layers_with(self, role: RoleTag) -> list[int]:
        return sorted(layer for layer, r in self.layer_map if r == role)

    def experts(self, layer: int, role: Role) -> list[int]:
        role = Role(role)
        return sorted(r.expert for (lay, r) in self.layer_map
                      if lay == layer and r.role == role)


@dataclass(frozen=True)
class WeightMatrix:
    data: np.ndarray
    layer: int
    role: RoleTag
    oriented: bool = False

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


def open_checkpoint(path, naming="llama") -> CheckpointIndex:
    """Index the tensors in ``path`` and map them to (layer, role) slots.

    ``path`` may be a safetensors file, an NPY directory, or a list of
    shards; ``naming`` is a preset name, a JSON path, or a NamingConfig.
    """
    config = resolve_naming(naming)
    records = scan_sources(path)
    layer_map: dict[tuple[int, RoleTag], str] = {}
    for rec in records:
        hit = config.match(rec.name)
        if hit is None:
            continue
        if len(rec.shape) != 2:
            raise ShapeError(f"tensor {rec.name!r} maps to {hit[1]} but has shape {rec.shape}")
        if not rec.decodable:
            raise ParseError(f"tensor {rec.name!r} has unsupported dtype {rec.dtype}")
        if hit in layer_map:
            raise DuplicateTensorError(
                f"tensors {layer_map[hit]!r} and {rec.name!r} both map to "
                f"layer {hit[0]}, role {hit[1]}")
        layer_map[hit] = rec.name
    num_layers = 1 + max((layer for layer, _ in layer_map), default=-1)
    return CheckpointIndex(tuple(records), layer_map, num_layers)


def _map_tensor(rec: TensorRecord) -> np.ndarray:
    order = "F" if rec.fortran_order else "C"
    if rec.byte_length == 0:
        return np.zeros(rec.shape, dtype=_STORED_DTYPES[rec.dtype], order=order)
    return np.memmap(rec.source, dtype=_STORED_DTYPES[rec.dtype], mode="r",
                     offset=rec.byte_offset, shape=rec.shape, order=order)


def _all_finite(a: np.ndarray) -> bool:
    flat = a.ravel(order="K")  # a view for C or F contiguous data
    return all(np.isfinite(flat[i:i + _FINITE_CHUNK]).all()
               for i in range(0, flat.size, _FINITE_CHUNK))


def load_matrix(index: CheckpointIndex, layer: int, role: RoleTag,
                compute_dtype: str = "f32") -> WeightMatrix:
    """Decode one slot to ``compute_dtype``. The result is not oriented.

    Stored data already in the compute dtype stays memory-mapped.
    """
    if compute_dtype not in _COMPUTE_DTYPES:
        raise ValueError(f"compute_dtype must be f32 or f64, got {compute_dtype!r}")
    if isinstance(role, str):
        role = RoleTag.parse(role)
    rec = index.slot(layer, role)
    raw = _map_tensor(rec)
    if rec.dtype == "bf16":
        # bf16 is the upper half of an f32: widen by appending 16 zero bits.
        data = (raw.astype(np.uint32) << 16).view(np.float32)
    else:
        data = raw
    target = _COMPUTE_DTYPES[compute_dtype]
    if data.dtype != target:
        data = data.astype(target)
    elif isinstance(data, np.memmap):
        data = data.view(np.ndarray)
    if not _all_finite(data):
        raise NonFiniteError(f"tensor {rec.name!r} (layer {layer}, {role}) has NaN/Inf entries")
    if data.flags.writeable:
        data.flags.writeable = False
    return WeightMatrix(data, layer, role, oriented=False)


def orient_matrix(w: WeightMatrix) -> WeightMatrix:
    """Lay the matrix out so its columns are neuron weight vectors."""
    if w.oriented:
        raise StateError(f"layer {w.layer} {w.role} is already oriented")
    data = w.data.T if w.role.role.transposed else w.data
    return WeightMatrix(data, w.layer, w.role, oriented=True)


def load_oriented(index: CheckpointIndex, layer: int, role: RoleTag,
                  compute_dtype: str = "f32") -> np.ndarray:
    return orient_matrix(load_matrix(index, layer, role, compute_dtype)).data
