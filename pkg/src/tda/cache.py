"""Per-class bounded key-value caches prioritized by prediction entropy.

Each class owns a queue of at most `shot_capacity` (feature, label-vector)
pairs. A new pair is appended while the queue has room; once full it can
only displace the current maximum-entropy pair, and only with a strictly
lower entropy. The effect over a stream is that each class retains its
k lowest-entropy samples, earliest arrival winning ties.

Storage is a compact set of preallocated arrays so the retrieval path is
a single matvec over all cached keys plus a sparse scatter of the label
values; label vectors (one-hots or {-1,0} masks) are stored as padded
sparse (column, value) pairs.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np

from .errors import InvalidClass, InvalidFeature

if TYPE_CHECKING:
    from .config import TdaConfig


@dataclass(frozen=True)
class CacheEntry:
    """One cached pair: feature key, label-vector value, and its priority.

    `entropy` is the normalized entropy of the frozen classifier's
    prediction at insertion time; it is never recomputed because the
    classifier never changes. `arrival` is the sample counter, used to
    break entropy ties in favor of earlier samples.
    """

    key: np.ndarray
    value: np.ndarray
    entropy: float
    arrival: int

    def __post_init__(self) -> None:
        if not (0.0 <= self.entropy <= 1.0):
            raise InvalidFeature(f"entropy {self.entropy} outside [0, 1]")
        if not np.all(np.isfinite(self.key)):
            raise InvalidFeature("cache key contains non-finite entries")
        if not np.any(self.value):
            raise InvalidFeature("cache value is all-zero (vacuous entry)")


class UpdateStatus(Enum):
    INSERTED = "inserted"
    REPLACED = "replaced"
    REJECTED = "rejected"


@dataclass(frozen=True)
class UpdateOutcome:
    status: UpdateStatus
    evicted: CacheEntry | None = None
    reason: str | None = None

    @classmethod
    def inserted(cls) -> "UpdateOutcome":
        return cls(UpdateStatus.INSERTED)

    @classmethod
    def replaced(cls, evicted: CacheEntry) -> "UpdateOutcome":
        return cls(UpdateStatus.REPLACED, evicted=evicted)

    @classmethod
    def rejected(cls, reason: str) -> "UpdateOutcome":
        return cls(UpdateStatus.REJECTED, reason=reason)


@dataclass(frozen=True)
class CacheMatrices:
    """Dense snapshot of a cache: stacked keys (M, D) and values (M, N).

    Row order is ascending class id, then ascending entropy, then
    ascending arrival, so the snapshot is deterministic.
    """

    keys: np.ndarray
    values: np.ndarray

    @property
    def size(self) -> int:
        return self.keys.shape[0]


class DynamicCache:
    """Bounded per-class entropy-priority cache over a feature stream.

    Single-writer: updates must happen in stream order. Snapshots taken
    through `as_matrices` are plain arrays and safe to share.
    """

    def __init__(self, num_classes: int, dim: int, shot_capacity: int) -> None:
        if num_classes < 2:
            raise InvalidClass(f"need at least 2 classes, got {num_classes}")
        if shot_capacity < 1:
            raise InvalidClass(f"shot capacity must be >= 1, got {shot_capacity}")
        self.num_classes = num_classes
        self.dim = dim
        self.shot_capacity = shot_capacity

        cap = num_classes * shot_capacity
        self._keys = np.zeros((cap, dim), dtype=np.float64)
        self._ent = np.zeros(cap, dtype=np.float64)
        self._arr = np.zeros(cap, dtype=np.int64)
        self._row_class = np.zeros(cap, dtype=np.int32)
        # Sparse label values, padded with column -1; width grows on demand.
        self._vcols = np.full((cap, 1), -1, dtype=np.int32)
        self._vvals = np.zeros((cap, 1), dtype=np.float64)
        self._class_rows: list[list[int]] = [[] for _ in range(num_classes)]
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def count(self, class_id: int) -> int:
        self._check_class(class_id)
        return len(self._class_rows[class_id])

    def _check_class(self, class_id: int) -> None:
        if not 0 <= class_id < self.num_classes:
            raise InvalidClass(
                f"class id {class_id} outside 0..{self.num_classes - 1}"
            )

    def update(self, class_id: int, entry: CacheEntry) -> UpdateOutcome:
        """Insert `entry` into the class queue, or displace its worst pair.

        Below capacity the entry is appended. At capacity the queue's
        maximum-entropy pair is replaced only if the new entry's entropy
        is strictly lower; equal entropy is rejected, which is what makes
        earlier arrivals win ties.
        """
        self._check_class(class_id)
        rows = self._class_rows[class_id]
        if len(rows) < self.shot_capacity:
            self._write_row(self._size, class_id, entry)
            rows.append(self._size)
            self._size += 1
            return UpdateOutcome.inserted()

        block = np.asarray(rows)
        ents = self._ent[block]
        max_ent = ents.max()
        if not entry.entropy < max_ent:
            return UpdateOutcome.rejected("entropy not below class maximum")
        # Among equal-maximum pairs, evict the latest arrival; that keeps
        # the retained set identical to the offline k-lowest selection.
        tied = block[ents == max_ent]
        victim = int(tied[np.argmax(self._arr[tied])])
        evicted = self._materialize(victim)
        self._write_row(victim, class_id, entry)
        return UpdateOutcome.replaced(evicted)

    def _write_row(self, row: int, class_id: int, entry: CacheEntry) -> None:
        value = np.asarray(entry.value)
        cols = np.flatnonzero(value)
        if cols.size > self._vcols.shape[1]:
            grow = cols.size - self._vcols.shape[1]
            self._vcols = np.pad(self._vcols, ((0, 0), (0, grow)), constant_values=-1)
            self._vvals = np.pad(self._vvals, ((0, 0), (0, grow)))
        self._keys[row] = entry.key
        self._ent[row] = entry.entropy
        self._arr[row] = entry.arrival
        self._row_class[row] = class_id
        self._vcols[row] = -1
        self._vcols[row, : cols.size] = cols
        self._vvals[row] = 0.0
        self._vvals[row, : cols.size] = value[cols]

    def _materialize(self, row: int) -> CacheEntry:
        value = np.zeros(self.num_classes, dtype=np.float64)
        cols = self._vcols[row]
        valid = cols >= 0
        value[cols[valid]] = self._vvals[row][valid]
        return CacheEntry(
            key=self._keys[row].copy(),
            value=value,
            entropy=float(self._ent[row]),
            arrival=int(self._arr[row]),
        )

    def entries(self, class_id: int) -> list[CacheEntry]:
        """Class queue contents, ascending (entropy, arrival)."""
        self._check_class(class_id)
        rows = np.asarray(self._class_rows[class_id], dtype=np.int64)
        if rows.size == 0:
            return []
        order = np.lexsort((self._arr[rows], self._ent[rows]))
        return [self._materialize(int(r)) for r in rows[order]]

    def max_entropy(self, class_id: int) -> float | None:
        """Current eviction-candidate entropy for a class, if any."""
        self._check_class(class_id)
        rows = self._class_rows[class_id]
        if not rows:
            return None
        return float(self._ent[np.asarray(rows)].max())

    def as_matrices(self) -> CacheMatrices:
        """Dense (keys, values) snapshot in documented row order."""
        m = self._size
        if m == 0:
            return CacheMatrices(
                keys=np.zeros((0, self.dim), dtype=np.float64),
                values=np.zeros((0, self.num_classes), dtype=np.float64),
            )
        rows = np.arange(m)
        order = np.lexsort((self._arr[rows], self._ent[rows], self._row_class[rows]))
        keys = self._keys[order].copy()
        values = np.zeros((m, self.num_classes), dtype=np.float64)
        cols = self._vcols[order]
        valid = cols >= 0
        values[np.nonzero(valid)[0], cols[valid]] = self._vvals[order][valid]
        return CacheMatrices(keys=keys, values=values)

    # Read-only views used by the adapter's retrieval fast path and by
    # the harness when it computes cache statistics.

    @property
    def key_rows(self) -> np.ndarray:
        return self._keys[: self._size]

    @property
    def value_cols(self) -> np.ndarray:
        return self._vcols[: self._size]

    @property
    def value_vals(self) -> np.ndarray:
        return self._vvals[: self._size]

    @property
    def entropies(self) -> np.ndarray:
        return self._ent[: self._size]

    @property
    def arrivals(self) -> np.ndarray:
        return self._arr[: self._size]

    @property
    def row_classes(self) -> np.ndarray:
        return self._row_class[: self._size]


def cache_update(cache: DynamicCache, class_id: int, entry: CacheEntry) -> UpdateOutcome:
    """Apply the two-condition insert/replace rule to one class queue."""
    return cache.update(class_id, entry)


def positive_update(
    cache: DynamicCache,
    f: np.ndarray,
    p: np.ndarray,
    ent: float,
    arrival: int,
) -> UpdateOutcome:
    """Store `f` under its pseudo label: a one-hot at argmax(p).

    Argmax ties resolve to the lowest class index.
    """
    class_id = int(np.argmax(p))
    value = np.zeros(cache.num_classes, dtype=np.float64)
    value[class_id] = 1.0
    entry = CacheEntry(key=f, value=value, entropy=ent, arrival=arrival)
    return cache.update(class_id, entry)


def negative_gate(ent: float, tau_l: float, tau_h: float) -> bool:
    """True iff entropy falls strictly inside (tau_l, tau_h).

    Selects moderately uncertain predictions: low entropy would bias the
    negative cache toward already-confident samples, high entropy carries
    too much prediction error.
    """
    return tau_l < ent < tau_h


def negative_mask(p: np.ndarray, p_l: float) -> np.ndarray:
    """{-1, 0} mask with -1 exactly where the class probability exceeds p_l.

    Classes at or below p_l are the ones the sample is judged unlikely to
    belong to; they stay 0 and are the ones penalized at retrieval. An
    all-zero mask is possible (no class above p_l) and must be rejected
    by the caller.
    """
    p = np.asarray(p)
    return -(p > p_l).astype(np.float64)


def negative_update(
    cache: DynamicCache,
    f: np.ndarray,
    p: np.ndarray,
    ent: float,
    config: "TdaConfig",
    arrival: int,
) -> UpdateOutcome:
    """Gate on entropy, build the negative mask, then apply the queue rule.

    Routing uses argmax(p), mirroring the positive cache, so per-class
    capacity keeps a well-defined meaning for mask values too.
    """
    if not negative_gate(ent, config.tau_l, config.tau_h):
        return UpdateOutcome.rejected("entropy outside gate interval")
    mask = negative_mask(p, config.p_l)
    if not mask.any():
        return UpdateOutcome.rejected("vacuous mask: no class above p_l")
    class_id = int(np.argmax(p))
    entry = CacheEntry(key=f, value=mask, entropy=ent, arrival=arrival)
    return cache.update(class_id, entry)


def as_matrices(cache: DynamicCache) -> CacheMatrices:
    """Dense snapshot of `cache`; empty caches give 0-row matrices."""
    return cache.as_matrices()
