"""Capacity-b summary of a weighted entry stream with lower-bound counters.

Slots are kept as parallel arrays sorted by position key (i*n + j), which is
what the merge scan in :mod:`skewprod.outer` consumes.  Point queries go
through a lookup table built lazily once the pass is over; any mutation
invalidates it.  Counters only ever underestimate the true accumulated
weight, never overestimate it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import SparseMatrix


@dataclass
class SummaryStats:
    """Instrumentation for decrement events, used by the property tests.

    Each event is (amount subtracted, distinct entries touched).  The
    Frequent-style guarantee requires amount == 0 or touched > capacity.
    """

    outer_events: list = field(default_factory=list)
    merge_events: list = field(default_factory=list)

    def record_outer(self, amount: float, touched: int) -> None:
        self.outer_events.append((amount, touched))

    def record_merge(self, amount: float, touched: int) -> None:
        self.merge_events.append((amount, touched))


class EntrySummary:
    """Up to b (entry, counter) slots over an n x n domain."""

    __slots__ = ("b", "n", "_keys", "_cnts", "_scratch_keys", "_scratch_cnts",
                 "_size", "_lookup", "stats")

    def __init__(self, b: int, n: int):
        if b < 1:
            raise ValueError("capacity must be positive")
        if n < 1:
            raise ValueError("dimension must be positive")
        self.b = int(b)
        self.n = int(n)
        cap = 2 * self.b + 2
        self._keys = np.zeros(cap, dtype=np.int64)
        self._cnts = np.zeros(cap, dtype=np.float64)
        self._scratch_keys = np.zeros(cap, dtype=np.int64)
        self._scratch_cnts = np.zeros(cap, dtype=np.float64)
        self._size = 0
        self._lookup = None
        self.stats = None

    @classmethod
    def from_pairs(cls, b: int, n: int, pairs) -> "EntrySummary":
        """Build directly from ((i, j), counter) pairs; mainly for tests."""
        s = cls(b, n)
        items = sorted((i * n + j, float(w)) for (i, j), w in pairs)
        if len(items) > b:
            raise ValueError("more slots than capacity")
        for t, (k, w) in enumerate(items):
            if w <= 0:
                raise ValueError("counters must be strictly positive")
            if t and items[t - 1][0] == k:
                raise ValueError(f"duplicate key {k}")
            s._keys[t] = k
            s._cnts[t] = w
        s._size = len(items)
        return s

    def __len__(self) -> int:
        return self._size

    def _invalidate(self) -> None:
        self._lookup = None

    def freeze(self) -> None:
        """Build the point-query table now instead of on first query."""
        self._ensure_lookup()

    def _ensure_lookup(self):
        if self._lookup is None:
            self._lookup = {
                int(self._keys[t]): float(self._cnts[t]) for t in range(self._size)
            }
        return self._lookup

    def estimate_entry(self, i: int, j: int) -> float:
        """Stored counter for (i, j), or 0 when the entry is not tracked."""
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError(f"entry ({i}, {j}) out of range for n={self.n}")
        return self._ensure_lookup().get(i * self.n + j, 0.0)

    def decrement_all(self, delta: float) -> "EntrySummary":
        """Subtract delta from every counter, evicting any that hit zero."""
        if delta < 0:
            raise ValueError("delta must be nonnegative")
        if delta == 0 or self._size == 0:
            return self
        kept = 0
        for t in range(self._size):
            w = self._cnts[t] - delta
            if w > 0.0:
                self._keys[kept] = self._keys[t]
                self._cnts[kept] = w
                kept += 1
        self._size = kept
        self._invalidate()
        return self

    def entries(self):
        """Yield ((i, j), counter) in position order."""
        n = self.n
        for t in range(self._size):
            k = int(self._keys[t])
            yield (k // n, k % n), float(self._cnts[t])

    def total_weight(self) -> float:
        return math.fsum(float(self._cnts[t]) for t in range(self._size))

    def to_sparse_matrix(self) -> SparseMatrix:
        """One triple per occupied slot; everything else is implicitly zero."""
        return SparseMatrix(
            n=self.n,
            triples=tuple((i, j, w) for (i, j), w in self.entries()),
        )

    def to_dense_array(self) -> np.ndarray:
        """Estimates as a full n x n array (test and report helper)."""
        out = np.zeros((self.n, self.n))
        for (i, j), w in self.entries():
            out[i, j] = w
        return out

    def write_csv(self, fh) -> None:
        """Dump slots as ``i,j,estimate`` rows in position order."""
        fh.write("i,j,estimate\n")
        for (i, j), w in self.entries():
            fh.write(f"{i},{j},{w!r}\n")
