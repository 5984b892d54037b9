"""Binary embedding files: fixed-dimension float32 vectors keyed by string.

File layout (all integers little-endian)::

    magic    4 bytes   b"VLEB"
    version  u16       currently 1
    kind     u8        0 = image, 1 = text
    dim      u32       vector width
    count    u64       number of records
    records, count times:
        key_len  u16
        key      key_len bytes, UTF-8
        vector   dim * f32

Vectors are persisted exactly as float32 (the precision encoders emit), so
write -> read reproduces the in-memory store bit for bit and read -> write
reproduces the file bytes. Normalization is never baked into the file; it is
a scoring-time option.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

import numpy as np

from .errors import EmbeddingFormatError

__all__ = [
    "MAGIC",
    "FORMAT_VERSION",
    "EmbeddingStore",
    "write_store",
    "read_store",
    "l2_normalize",
]

MAGIC = b"VLEB"
FORMAT_VERSION = 1
_KINDS = ("image", "text")  # the kind byte is the index into this tuple
_HEADER = struct.Struct("<4sHBIQ")
_KEY_LEN = struct.Struct("<H")


@dataclass
class EmbeddingStore:
    """Fixed-dimension float32 vectors keyed by view id or sample id."""

    kind: str
    dim: int
    entries: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        if not isinstance(self.dim, int) or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        clean: dict[str, np.ndarray] = {}
        for key, vec in self.entries.items():
            if not isinstance(key, str) or not key:
                raise ValueError(f"keys must be nonempty strings, got {key!r}")
            arr = np.asarray(vec, dtype=np.float32)
            if arr.shape != (self.dim,):
                raise ValueError(
                    f"vector for key '{key}' has shape {arr.shape}, expected ({self.dim},)"
                )
            if not np.isfinite(arr).all():
                raise ValueError(f"vector for key '{key}' contains non-finite values")
            clean[key] = arr
        self.entries = clean

    @classmethod
    def from_pairs(cls, kind: str, dim: int, pairs: Iterable[tuple[str, object]]) -> "EmbeddingStore":
        entries: dict[str, np.ndarray] = {}
        for key, vec in pairs:
            if key in entries:
                raise ValueError(f"duplicate key '{key}'")
            entries[key] = vec  # validated in __post_init__
        return cls(kind, dim, entries)

    def __len__(self) -> int:
        return len(self.entries)


def write_store(store: EmbeddingStore, sink: str | Path | IO[bytes]) -> int:
    """Serialize a store; returns the number of bytes written."""
    if hasattr(sink, "write"):
        return _write(store, sink)
    with open(sink, "wb") as fh:
        return _write(store, fh)


def _write(store: EmbeddingStore, fh: IO[bytes]) -> int:
    n = fh.write(
        _HEADER.pack(MAGIC, FORMAT_VERSION, _KINDS.index(store.kind), store.dim, len(store.entries))
    )
    for key, vec in store.entries.items():
        encoded = key.encode("utf-8")
        if len(encoded) > 0xFFFF:
            raise ValueError(f"key '{key[:32]}...' exceeds the 65535-byte limit")
        n += fh.write(_KEY_LEN.pack(len(encoded)))
        n += fh.write(encoded)
        n += fh.write(np.ascontiguousarray(vec, dtype="<f4").tobytes())
    return n


class _Cursor:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        end = self.pos + n
        if end > len(self.data):
            raise EmbeddingFormatError(
                f"truncated file: needed {n} bytes for {what} at offset {self.pos}, "
                f"only {len(self.data) - self.pos} remain"
            )
        chunk = self.data[self.pos:end]
        self.pos = end
        return chunk


def read_store(source: str | Path | IO[bytes]) -> EmbeddingStore:
    """Parse an embedding file, validating every record.

    Distinct failures raise :class:`EmbeddingFormatError` with distinct
    messages: wrong magic, unsupported version, unknown kind byte, truncated
    payload, non-finite vector values, duplicate keys, and trailing bytes.
    """
    if hasattr(source, "read"):
        data = source.read()
    else:
        data = Path(source).read_bytes()

    cur = _Cursor(data)
    header = cur.take(_HEADER.size, "header")
    magic, version, kind_byte, dim, count = _HEADER.unpack(header)
    if magic != MAGIC:
        raise EmbeddingFormatError(f"bad magic {magic!r}: not an embedding file")
    if version != FORMAT_VERSION:
        raise EmbeddingFormatError(
            f"unsupported format version {version} (expected {FORMAT_VERSION})"
        )
    if kind_byte >= len(_KINDS):
        raise EmbeddingFormatError(f"unknown kind byte {kind_byte}")
    if dim < 1:
        raise EmbeddingFormatError(f"dim must be positive, got {dim}")

    vec_bytes = 4 * dim
    entries: dict[str, np.ndarray] = {}
    for i in range(count):
        (key_len,) = _KEY_LEN.unpack(cur.take(_KEY_LEN.size, f"key length of record #{i}"))
        raw_key = cur.take(key_len, f"key of record #{i}")
        try:
            key = raw_key.decode("utf-8")
        except UnicodeDecodeError:
            raise EmbeddingFormatError(f"key of record #{i} is not valid UTF-8") from None
        if key in entries:
            raise EmbeddingFormatError(f"duplicate key '{key}' at record #{i}")
        vec = np.frombuffer(cur.take(vec_bytes, f"vector of record #{i} ('{key}')"), dtype="<f4")
        if not np.isfinite(vec).all():
            raise EmbeddingFormatError(f"vector for key '{key}' contains non-finite values")
        entries[key] = vec.copy()

    if cur.pos != len(data):
        raise EmbeddingFormatError(
            f"trailing data: {len(data) - cur.pos} bytes after the last record"
        )
    return EmbeddingStore(_KINDS[kind_byte], dim, entries)


def l2_normalize(v) -> np.ndarray:
    """Scale a vector to unit Euclidean norm, preserving direction.

    Raises ValueError for (near-)zero vectors, whose direction is undefined.
    """
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"expected a 1-D vector, got shape {arr.shape}")
    norm = float(np.linalg.norm(arr))
    if not np.isfinite(norm):
        raise ValueError("cannot normalize a vector with non-finite components")
    if norm < 1e-12:
        raise ValueError(f"cannot normalize a zero vector (norm={norm:.3e})")
    return arr / norm
