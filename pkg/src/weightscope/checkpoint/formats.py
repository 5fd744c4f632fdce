"""Container parsing for safetensors files and NPY-per-tensor directories.

Only headers are read here; tensor bytes are mapped lazily by the loader.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from ..errors import DuplicateTensorError, ParseError

# Byte size of every safetensors dtype; only the four float types decode.
DTYPE_SIZES = {
    "BOOL": 1, "U8": 1, "I8": 1, "F8_E4M3": 1, "F8_E5M2": 1,
    "I16": 2, "U16": 2, "F16": 2, "BF16": 2,
    "I32": 4, "U32": 4, "F32": 4,
    "I64": 8, "U64": 8, "F64": 8,
}
FLOAT_DTYPES = {"F64": "f64", "F32": "f32", "F16": "f16", "BF16": "bf16"}
_NUMPY_TO_ST = {np.dtype("<f8"): "F64", np.dtype("<f4"): "F32", np.dtype("<f2"): "F16"}

_MAX_HEADER = 100 * 1024 * 1024


@dataclass(frozen=True)
class TensorRecord:
    name: str
    dtype: str  # f64 | f32 | f16 | bf16, or the raw safetensors tag if undecodable
    shape: tuple[int, ...]
    byte_offset: int  # absolute offset in ``source``
    byte_length: int
    source: Path
    fortran_order: bool = False

    @property
    def decodable(self) -> bool:
        return self.dtype in FLOAT_DTYPES.values()


def _reject_duplicates(pairs):
    out = {}
    for key, value in pairs:
        if key in out:
            raise DuplicateTensorError(f"duplicate tensor name {key!r} in header")
        out[key] = value
    return out


def read_safetensors_header(path) -> list[TensorRecord]:
    path = Path(path)
    size = path.stat().st_size
    with open(path, "rb") as fh:
        raw_len = fh.read(8)
        if len(raw_len) < 8:
            raise ParseError(f"{path}: file too short for a safetensors header")
        (header_len,) = struct.unpack("<Q", raw_len)
        if header_len > min(size - 8, _MAX_HEADER):
            raise ParseError(f"{path}: header length {header_len} exceeds file size")
        blob = fh.read(header_len)
    try:
        header = json.loads(blob.decode("utf-8"), object_pairs_hook=_reject_duplicates)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: malformed header JSON ({exc})") from None
    if not isinstance(header, dict):
        raise ParseError(f"{path}: header is not a JSON object")

    data_start = 8 + header_len
    data_size = size - data_start
    records = []
    for name, info in header.items():
        if name == "__metadata__":
            continue
        try:
            dtype = info["dtype"]
            shape = tuple(int(d) for d in info["shape"])
            begin, end = (int(x) for x in info["data_offsets"])
        except (KeyError, TypeError, ValueError):
            raise ParseError(f"{path}: bad entry for tensor {name!r}") from None
        if dtype not in DTYPE_SIZES:
            raise ParseError(f"{path}: tensor {name!r} has unknown dtype {dtype!r}")
        if any(d < 0 for d in shape):
            raise ParseError(f"{path}: tensor {name!r} has a negative dimension")
        expected = int(np.prod(shape, dtype=np.int64)) * DTYPE_SIZES[dtype]
        if not 0 <= begin <= end <= data_size or end - begin != expected:
            raise ParseError(
                f"{path}: tensor {name!r} offsets [{begin}, {end}) do not match "
                f"{expected} bytes inside a {data_size}-byte buffer")
        records.append(TensorRecord(
            name=name,
            dtype=FLOAT_DTYPES.get(dtype, dtype),
            shape=shape,
            byte_offset=data_start + begin,
            byte_length=expected,
            source=path,
        ))
    return records


def bf16_bits(values: np.ndarray) -> np.ndarray:
    """Round float32 values to bfloat16 (nearest-even) and return the raw bits."""
    bits = np.ascontiguousarray(values, dtype="<f4").view("<u4").astype(np.uint64)
    rounded = (bits + 0x7FFF + ((bits >> 16) & 1)) >> 16
    return rounded.astype("<u2")


def write_safetensors(path, tensors: Mapping[str, np.ndarray],
                      dtypes: Mapping[str, str] | None = None,
                      metadata: Mapping[str, str] | None = None) -> None:
    """Write ``tensors`` as a safetensors file.

    ``dtypes`` optionally overrides the stored tag per tensor. For ``"BF16"``
    a uint16 array is written as raw bits and float arrays are rounded.
    """
    dtypes = dict(dtypes or {})
    header: dict = {}
    if metadata:
        header["__metadata__"] = dict(metadata)
    chunks = []
    offset = 0
    for name, array in tensors.items():
        array = np.asarray(array)
        tag = dtypes.get(name)
        if tag == "BF16":
            payload = array.astype("<u2") if array.dtype == np.uint16 else bf16_bits(array)
        else:
            if tag is None:
                tag = _NUMPY_TO_ST.get(array.dtype.newbyteorder("<"))
                if tag is None:
                    raise ValueError(f"{name}: cannot store dtype {array.dtype}")
            payload = array.astype({"F64": "<f8", "F32": "<f4", "F16": "<f2"}[tag])
        data = np.ascontiguousarray(payload).tobytes()
        header[name] = {"dtype": tag, "shape": list(array.shape),
                        "data_offsets": [offset, offset + len(data)]}
        chunks.append(data)
        offset += len(data)
    blob = json.dumps(header, separators=(",", ":")).encode()
    blob += b" " * (-len(blob) % 8)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for data in chunks:
            fh.write(data)


def read_npy_record(path) -> TensorRecord:
    path = Path(path)
    with open(path, "rb") as fh:
        try:
            version = np.lib.format.read_magic(fh)
            if version == (1, 0):
                shape, fortran, dtype = np.lib.format.read_array_header_1_0(fh)
            elif version in ((2, 0), (3, 0)):
                shape, fortran, dtype = np.lib.format.read_array_header_2_0(fh)
            else:
                raise ParseError(f"{path}: unsupported NPY version {version}")
        except ValueError as exc:
            raise ParseError(f"{path}: {exc}") from None
        offset = fh.tell()
    tag = _NUMPY_TO_ST.get(dtype)
    if tag is None:
        raise ParseError(f"{path}: unsupported NPY dtype {dtype.str}")
    length = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
    if offset + length > path.stat().st_size:
        raise ParseError(f"{path}: truncated array data")
    name = path.name[: -len(".npy")]
    return TensorRecord(name, FLOAT_DTYPES[tag], tuple(shape), offset, length, path,
                        fortran_order=bool(fortran))


def scan_sources(paths) -> list[TensorRecord]:
    """Read headers of every container in ``paths``.

    Each entry may be a safetensors file, a directory of ``*.npy`` files, or a
    directory of safetensors shards. Names must be unique across all inputs.
    """
    if isinstance(paths, (str, Path)):
        paths = [paths]
    records: list[TensorRecord] = []
    for entry in paths:
        entry = Path(entry)
        if entry.is_dir():
            npys = sorted(entry.glob("*.npy"))
            shards = sorted(entry.glob("*.safetensors"))
            if npys and shards:
                raise ParseError(f"{entry}: mixes .npy and .safetensors files")
            for p in npys:
                records.append(read_npy_record(p))
            for p in shards:
                records.extend(read_safetensors_header(p))
        elif entry.is_file():
            if entry.suffix == ".npy":
                records.append(read_npy_record(entry))
            else:
                records.extend(read_safetensors_header(entry))
        else:
            raise FileNotFoundError(entry)
    seen: set[str] = set()
    for rec in records:
        if rec.name in seen:
            raise DuplicateTensorError(f"tensor {rec.name!r} appears in more than one source")
        seen.add(rec.name)
    return records
