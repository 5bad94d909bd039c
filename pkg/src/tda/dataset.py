"""Embedding dataset container and the TDAE binary file format.

TDAE layout (all integers little-endian; see docs/format.md for the
bit-exact description):

    magic   4 bytes  b"TDAE"
    version u32      currently 1
    D       u32      feature dimension
    N       u32      class count
    names   N x (u32 byte length + UTF-8 bytes)
    head    N*D float32, row-major text-embedding matrix
    count   u64      number of sample records
    records count x (i32 label, D float32 feature)

Labels are -1 for unlabeled samples. Features and head rows are written
unit-norm float32; the reader re-normalizes defensively since float32
rounding perturbs norms at the 1e-7 level and other writers may be
sloppier (up to 1e-3 is tolerated silently).
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CorruptDataset, InvalidFeature, UnsupportedFormat
from .numerics import ClassifierHead

MAGIC = b"TDAE"
VERSION = 1


@dataclass
class EmbeddingDataset:
    """A frozen classifier head plus an ordered stream of feature samples.

    Sample order is semantically significant: the engine consumes rows of
    `features` strictly in order. `labels[i]` is -1 when ground truth is
    unknown.
    """

    class_names: list[str]
    head: np.ndarray      # (N, D) float32, unit rows
    features: np.ndarray  # (S, D) float32, unit rows
    labels: np.ndarray    # (S,) int32, -1 or 0..N-1

    def __post_init__(self) -> None:
        self.head = _as_unit_rows(np.asarray(self.head), "head")
        self.features = _as_unit_rows(np.asarray(self.features), "features")
        self.labels = np.asarray(self.labels, dtype=np.int32)
        n, d = self.head.shape
        if len(self.class_names) != n:
            raise CorruptDataset(
                f"{len(self.class_names)} class names for {n} head rows"
            )
        if self.features.ndim != 2 or self.features.shape[1] != d:
            raise CorruptDataset(
                f"feature matrix shape {self.features.shape} incompatible with D={d}"
            )
        if self.labels.shape != (self.features.shape[0],):
            raise CorruptDataset("labels length differs from sample count")
        if self.labels.size and (
            self.labels.min() < -1 or self.labels.max() >= n
        ):
            raise CorruptDataset("label outside -1..N-1")

    @property
    def dim(self) -> int:
        return self.head.shape[1]

    @property
    def num_classes(self) -> int:
        return self.head.shape[0]

    @property
    def num_samples(self) -> int:
        return self.features.shape[0]

    def classifier_head(self, logit_scale: float) -> ClassifierHead:
        return ClassifierHead(weights=self.head, logit_scale=logit_scale)

    def permuted(self, seed: int) -> "EmbeddingDataset":
        """Copy with sample order shuffled by a seeded permutation."""
        rng = np.random.Generator(np.random.Philox(seed))
        order = rng.permutation(self.num_samples)
        return EmbeddingDataset(
            class_names=list(self.class_names),
            head=self.head,
            features=self.features[order],
            labels=self.labels[order],
        )


def _as_unit_rows(m: np.ndarray, what: str) -> np.ndarray:
    if m.ndim != 2:
        raise CorruptDataset(f"{what} must be 2-D, got shape {m.shape}")
    m = m.astype(np.float32, copy=True)
    if not np.all(np.isfinite(m)):
        raise InvalidFeature(f"{what} contains non-finite entries")
    norms = np.linalg.norm(m.astype(np.float64), axis=1)
    if np.any(norms == 0.0):
        row = int(np.flatnonzero(norms == 0.0)[0])
        raise InvalidFeature(f"{what} row {row} has zero norm")
    # Rows already unit within float32 rounding are kept bit-identical so
    # write/read round trips are byte-exact; anything further off gets
    # re-normalized defensively.
    off = np.abs(norms - 1.0) > 1e-6
    if off.any():
        m[off] = (m[off].astype(np.float64) / norms[off, None]).astype(np.float32)
    return m


def write_dataset(ds: EmbeddingDataset, path: str | Path) -> None:
    """Serialize `ds` to TDAE; read_dataset(write_dataset(ds)) is identity."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III", VERSION, ds.dim, ds.num_classes))
        for name in ds.class_names:
            raw = name.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
        fh.write(np.ascontiguousarray(ds.head, dtype="<f4").tobytes())
        fh.write(struct.pack("<Q", ds.num_samples))
        feats = np.ascontiguousarray(ds.features, dtype="<f4")
        for i in range(ds.num_samples):
            fh.write(struct.pack("<i", int(ds.labels[i])))
            fh.write(feats[i].tobytes())


class _Reader:
    def __init__(self, data: bytes, path: str) -> None:
        self.data = data
        self.off = 0
        self.path = path

    def take(self, n: int, what: str) -> bytes:
        if self.off + n > len(self.data):
            raise CorruptDataset(f"{self.path}: truncated while reading {what}")
        chunk = self.data[self.off : self.off + n]
        self.off += n
        return chunk

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]

    def u64(self, what: str) -> int:
        return struct.unpack("<Q", self.take(8, what))[0]

    def i32(self, what: str) -> int:
        return struct.unpack("<i", self.take(4, what))[0]


def read_dataset(path: str | Path) -> EmbeddingDataset:
    """Parse a TDAE file, validating structure and payload.

    Raises UnsupportedFormat on a bad magic or unknown version,
    CorruptDataset on truncation or inconsistent fields (naming the
    record index where applicable), InvalidFeature on NaN payloads.
    """
    data = Path(path).read_bytes()
    r = _Reader(data, str(path))
    if r.take(4, "magic") != MAGIC:
        raise UnsupportedFormat(f"{path}: bad magic, not a TDAE file")
    version = r.u32("version")
    if version != VERSION:
        raise UnsupportedFormat(f"{path}: unsupported version {version}")
    dim = r.u32("dimension")
    n = r.u32("class count")
    if dim == 0 or n < 2:
        raise CorruptDataset(f"{path}: implausible header D={dim}, N={n}")
    names = []
    for i in range(n):
        ln = r.u32(f"name {i} length")
        try:
            names.append(r.take(ln, f"name {i}").decode("utf-8"))
        except UnicodeDecodeError:
            raise CorruptDataset(f"{path}: class name {i} is not valid UTF-8") from None
    head = np.frombuffer(r.take(4 * n * dim, "head matrix"), dtype="<f4").reshape(n, dim)
    if not np.all(np.isfinite(head)):
        raise InvalidFeature(f"{path}: head matrix contains non-finite entries")
    count = r.u64("sample count")
    labels = np.empty(count, dtype=np.int32)
    features = np.empty((count, dim), dtype=np.float32)
    for i in range(count):
        labels[i] = r.i32(f"record {i} label")
        vec = np.frombuffer(r.take(4 * dim, f"record {i} feature"), dtype="<f4")
        if not np.all(np.isfinite(vec)):
            raise InvalidFeature(f"{path}: record {i} feature has non-finite entries")
        features[i] = vec
    if labels.size and (labels.min() < -1 or labels.max() >= n):
        bad = int(np.flatnonzero((labels < -1) | (labels >= n))[0])
        raise CorruptDataset(f"{path}: record {bad} label {labels[bad]} out of range")
    if r.off != len(data):
        raise CorruptDataset(f"{path}: {len(data) - r.off} trailing bytes")
    return EmbeddingDataset(
        class_names=names, head=head, features=features, labels=labels
    )
