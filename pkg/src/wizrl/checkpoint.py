"""Binary checkpoint files for network parameters.

Layout (all integers little-endian):

* magic bytes ``WIZNN1\\n``
* per tensor, in insertion order:
  - name length (u32), name (UTF-8)
  - rank (u32), then one u32 per dimension
  - raw IEEE-754 32-bit values, row-major
* trailing u64 checksum over every payload byte (everything between the
  magic and the checksum): ``(crc32(payload) << 32) | adler32(payload)``.

Writes go through a temporary file in the same directory followed by an
atomic rename, so readers never observe a half-written checkpoint.
"""

from __future__ import annotations

import os
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "MAGIC",
    "TensorEntry",
    "save_checkpoint",
    "load_checkpoint",
    "inspect_checkpoint",
]

MAGIC = b"WIZNN1\n"
_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")


def _checksum(payload: bytes) -> int:
    return (zlib.crc32(payload) << 32) | zlib.adler32(payload)


@dataclass(frozen=True)
class TensorEntry:
    """Name, shape, and element count of one stored tensor."""

    name: str
    shape: tuple[int, ...]

    @property
    def size(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64)) if self.shape else 1


def save_checkpoint(path, tensors: dict[str, np.ndarray]) -> None:
    """Write ``tensors`` (cast to float32) to ``path`` atomically."""
    path = Path(path)
    chunks = []
    for name, arr in tensors.items():
        arr = np.asarray(arr, dtype="<f4")
        encoded = name.encode("utf-8")
        chunks.append(_U32.pack(len(encoded)))
        chunks.append(encoded)
        chunks.append(_U32.pack(arr.ndim))
        for dim in arr.shape:
            chunks.append(_U32.pack(dim))
        chunks.append(arr.tobytes(order="C"))
    payload = b"".join(chunks)
    blob = MAGIC + payload + _U64.pack(_checksum(payload))
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(blob)
    os.replace(tmp, path)


class _Reader:
    def __init__(self, payload: bytes):
        self.payload = payload
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.payload):
            raise ValueError("truncated checkpoint payload")
        out = self.payload[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return _U32.unpack(self.take(4))[0]

    @property
    def exhausted(self) -> bool:
        return self.pos == len(self.payload)


def _verified_payload(path) -> bytes:
    blob = Path(path).read_bytes()
    if not blob.startswith(MAGIC):
        raise ValueError(f"{path}: bad magic bytes, not a checkpoint file")
    if len(blob) < len(MAGIC) + 8:
        raise ValueError(f"{path}: file too short for a checksum")
    payload = blob[len(MAGIC) : -8]
    (stored,) = _U64.unpack(blob[-8:])
    if _checksum(payload) != stored:
        raise ValueError(f"{path}: checksum mismatch, file corrupt")
    return payload


def load_checkpoint(path) -> dict[str, np.ndarray]:
    """Read a checkpoint back as an ordered name-to-float32-array mapping."""
    reader = _Reader(_verified_payload(path))
    tensors: dict[str, np.ndarray] = {}
    while not reader.exhausted:
        name = reader.take(reader.u32()).decode("utf-8")
        rank = reader.u32()
        shape = tuple(reader.u32() for _ in range(rank))
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        data = reader.take(4 * count)
        tensors[name] = np.frombuffer(data, dtype="<f4").reshape(shape).copy()
    return tensors


def inspect_checkpoint(path) -> list[TensorEntry]:
    """List stored tensors without materializing their values."""
    reader = _Reader(_verified_payload(path))
    entries = []
    while not reader.exhausted:
        name = reader.take(reader.u32()).decode("utf-8")
        rank = reader.u32()
        shape = tuple(reader.u32() for _ in range(rank))
        entry = TensorEntry(name, shape)
        reader.take(4 * entry.size)
        entries.append(entry)
    return entries
