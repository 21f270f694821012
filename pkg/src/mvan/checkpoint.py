"""Flat binary parameter snapshots.

Layout (all integers little-endian, arrays raw float64 little-endian):

    magic   4 bytes  b"MVCK"
    version u32      currently 1
    count   u32      number of parameters
    then per parameter, in lexicographic name order:
    name_len u16, name utf-8, ndim u8, each dim u32, data float64[...]

Writing sorts by name and carries no timestamps, so the same parameters
always produce the same bytes; reading restores bit-identical arrays.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Dict, Mapping

import numpy as np

MAGIC = b"MVCK"
VERSION = 1


class CheckpointError(Exception):
    """Malformed or truncated checkpoint file."""


def serialize_params(params: Mapping[str, np.ndarray]) -> bytes:
    chunks = [MAGIC, struct.pack("<II", VERSION, len(params))]
    for name in sorted(params):
        # np.array rather than ascontiguousarray: the latter promotes 0-d to 1-d
        arr = np.array(params[name], dtype=np.float64, order="C")
        encoded = name.encode("utf-8")
        if len(encoded) > 0xFFFF:
            raise CheckpointError(f"parameter name too long: {name[:40]}...")
        if arr.ndim > 0xFF:
            raise CheckpointError(f"parameter rank too high: {name}")
        chunks.append(struct.pack("<H", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<B", arr.ndim))
        chunks.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        chunks.append(arr.astype("<f8", copy=False).tobytes())
    return b"".join(chunks)


def save_checkpoint(path, params: Mapping[str, np.ndarray]) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_bytes(serialize_params(params))


def deserialize_params(blob: bytes) -> Dict[str, np.ndarray]:
    view = memoryview(blob)
    if len(view) < 12 or bytes(view[:4]) != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    version, count = struct.unpack_from("<II", view, 4)
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    offset = 12
    out: Dict[str, np.ndarray] = {}

    def need(n: int) -> None:
        if offset + n > len(view):
            raise CheckpointError("checkpoint truncated")

    for _ in range(count):
        need(2)
        (name_len,) = struct.unpack_from("<H", view, offset)
        offset += 2
        need(name_len)
        name = bytes(view[offset:offset + name_len]).decode("utf-8")
        offset += name_len
        need(1)
        (ndim,) = struct.unpack_from("<B", view, offset)
        offset += 1
        need(4 * ndim)
        shape = struct.unpack_from(f"<{ndim}I", view, offset)
        offset += 4 * ndim
        size = int(np.prod(shape, dtype=np.int64)) if ndim else 1
        need(8 * size)
        arr = np.frombuffer(view, dtype="<f8", count=size, offset=offset).reshape(shape)
        offset += 8 * size
        out[name] = arr.astype(np.float64).copy()
    if offset != len(view):
        raise CheckpointError("checkpoint has trailing bytes")
    return out


def load_checkpoint(path) -> Dict[str, np.ndarray]:
    return deserialize_params(Path(path).read_bytes())
