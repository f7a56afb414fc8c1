"""Id-indexed embedding matrices: normalization and the binary ``CREM`` store.

File layout (little-endian)::

    magic     4 bytes  b"CREM"
    version   u32      1
    flags     u32      bit 0 = normalized
    model_id  u32 length + UTF-8 bytes
    n         u64
    E         u32
    ids       n x (u32 length + UTF-8 bytes)
    payload   n x E float32, row-major
"""

from __future__ import annotations

import struct
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from claimrank.errors import DimensionMismatchError, DuplicateIdError, FormatError, ZeroVectorError

MAGIC = b"CREM"
VERSION = 1
FLAG_NORMALIZED = 1
ZERO_NORM = 1e-12


def l2_normalize(vector: Sequence[float] | np.ndarray) -> np.ndarray:
    """Scale a vector to unit L2 norm.

    Raises ZeroVectorError when the norm is below 1e-12; whole-matrix
    normalization (``normalize_rows``) zeroes such rows instead.
    """
    v = np.asarray(vector, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    norm = float(np.linalg.norm(v))
    if norm < ZERO_NORM:
        raise ZeroVectorError(f"cannot normalize vector with norm {norm:.3g}")
    return v / norm


def normalize_rows(rows: np.ndarray) -> np.ndarray:
    """Row-wise unit normalization to float32; degenerate rows become all-zero."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2:
        raise DimensionMismatchError(f"expected 2-D rows, got shape {rows.shape}")
    if not np.all(np.isfinite(rows)):
        raise ValueError("rows contain non-finite entries")
    norms = np.linalg.norm(rows, axis=1, keepdims=True)
    zero = norms[:, 0] < ZERO_NORM
    safe = np.where(zero[:, None], 1.0, norms)
    out = rows / safe
    out[zero] = 0.0
    return out.astype(np.float32)


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    """Immutable ``n x E`` float32 matrix with one string id per row."""

    model_id: str
    ids: tuple[str, ...]
    rows: np.ndarray
    normalized: bool = True
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        rows = np.ascontiguousarray(self.rows, dtype=np.float32)
        if rows.ndim != 2:
            raise DimensionMismatchError(f"rows must be 2-D, got shape {rows.shape}")
        ids = tuple(self.ids)
        if len(ids) != rows.shape[0]:
            raise DimensionMismatchError(f"{len(ids)} ids for {rows.shape[0]} rows")
        index = {}
        for i, id_ in enumerate(ids):
            if id_ in index:
                raise DuplicateIdError(f"duplicate row id {id_!r}")
            index[id_] = i
        if rows.flags.writeable:
            rows = rows.copy() if rows is self.rows else rows
            rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_vectors(
        cls, model_id: str, ids: Sequence[str], vectors: np.ndarray | Sequence[Sequence[float]], dim: int | None = None
    ) -> EmbeddingMatrix:
        """Normalize raw provider vectors into a matrix."""
        if len(ids) == 0:
            return cls(model_id, (), np.zeros((0, dim or 0), dtype=np.float32), normalized=True)
        return cls(model_id, tuple(ids), normalize_rows(np.asarray(vectors)), normalized=True)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    @property
    def zero_rows(self) -> np.ndarray:
        """Boolean mask of degenerate rows (stored as all-zero, score 0 everywhere)."""
        return ~self.rows.any(axis=1)

    def index_of(self, id_: str) -> int:
        return self._index[id_]

    def indices(self, ids: Sequence[str]) -> np.ndarray:
        return np.fromiter((self._index[i] for i in ids), dtype=np.int64, count=len(ids))

    def vector(self, id_: str) -> np.ndarray:
        return self.rows[self._index[id_]]

    def __contains__(self, id_: object) -> bool:
        return id_ in self._index

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmbeddingMatrix):
            return NotImplemented
        return (
            self.model_id == other.model_id
            and self.ids == other.ids
            and self.normalized == other.normalized
            and self.rows.shape == other.rows.shape
            and self.rows.tobytes() == other.rows.tobytes()
        )

    __hash__ = None  # type: ignore[assignment]


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


def dumps_matrix(m: EmbeddingMatrix) -> bytes:
    parts = [
        MAGIC,
        struct.pack("<II", VERSION, FLAG_NORMALIZED if m.normalized else 0),
        _pack_str(m.model_id),
        struct.pack("<QI", m.n, m.dim),
    ]
    parts.extend(_pack_str(i) for i in m.ids)
    parts.append(m.rows.astype("<f4", copy=False).tobytes(order="C"))
    return b"".join(parts)


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, size: int) -> bytes:
        if self.pos + size > len(self.buf):
            raise FormatError(f"truncated file: need {size} bytes at offset {self.pos}")
        out = self.buf[self.pos : self.pos + size]
        self.pos += size
        return out

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self) -> str:
        (length,) = self.unpack("<I")
        try:
            return self.take(length).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError(f"invalid UTF-8 string at offset {self.pos}") from exc


def loads_matrix(buf: bytes) -> EmbeddingMatrix:
    r = _Reader(buf)
    if r.take(4) != MAGIC:
        raise FormatError("bad magic bytes, not a CREM file")
    version, flags = r.unpack("<II")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    model_id = r.string()
    n, dim = r.unpack("<QI")
    ids = [r.string() for _ in range(n)]
    payload = r.take(n * dim * 4)
    if r.pos != len(buf):
        raise FormatError(f"{len(buf) - r.pos} trailing bytes after payload")
    rows = np.frombuffer(payload, dtype="<f4").reshape(n, dim).astype(np.float32)
    try:
        return EmbeddingMatrix(model_id, tuple(ids), rows, normalized=bool(flags & FLAG_NORMALIZED))
    except DuplicateIdError as exc:
        raise FormatError(str(exc)) from exc


def save_matrix(m: EmbeddingMatrix, path: str | Path) -> None:
    """Write atomically (temp file + rename) so a crash never leaves a half file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(dumps_matrix(m))
    tmp.replace(path)


def load_matrix(path: str | Path) -> EmbeddingMatrix:
    return loads_matrix(Path(path).read_bytes())
