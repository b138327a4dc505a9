"""Per-outer-product machinery: rank selection, implicit top-b cover, position
sorting, and the summary merge.

The outer product of two sorted nonnegative vectors is sorted along both axes,
which is what makes every routine here cheap: rank selection never
materializes the n^2 products, the top-b cover is a two-pointer sweep, and the
position sort touches only the covered entries.

All tie handling is deterministic.  Sorted vectors order equal values by
ascending original position, and entries tied at a selection cutoff are
admitted in position order.  Under these two rules the per-row counts of the
top-b cover stay monotone, so the implicit representation is always valid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ENUMERATION_LIMIT = 4096  # below this many products, brute enumeration wins


@dataclass(frozen=True)
class SortedVector:
    """Nonzero vector entries as (value, original position), value-descending.

    Equal values are ordered by ascending position; positions are distinct.
    """

    vals: np.ndarray
    pos: np.ndarray

    @classmethod
    def from_dense(cls, vec: np.ndarray) -> "SortedVector":
        """Prune zeros and sort.  Negative values are rejected."""
        vec = np.asarray(vec, dtype=np.float64)
        if vec.size and float(vec.min()) < 0.0:
            raise ValueError("sorted vectors hold nonnegative values only")
        nz = np.nonzero(vec)[0]
        vals = vec[nz]
        order = np.lexsort((nz, -vals))
        return cls(vals=vals[order], pos=nz[order].astype(np.int64))

    @classmethod
    def from_pairs(cls, pairs) -> "SortedVector":
        """Build from an iterable of (value, position); zeros are dropped."""
        pairs = [(float(v), int(p)) for v, p in pairs if v != 0.0]
        for v, _ in pairs:
            if v < 0:
                raise ValueError("sorted vectors hold nonnegative values only")
        pairs.sort(key=lambda t: (-t[0], t[1]))
        vals = np.array([v for v, _ in pairs], dtype=np.float64)
        pos = np.array([p for _, p in pairs], dtype=np.int64)
        return cls(vals=vals, pos=pos)

    def __len__(self) -> int:
        return len(self.vals)


@dataclass(frozen=True)
class TopBList:
    """Implicit cover of the largest-b entries of one outer product.

    ``rows`` holds (q, r_q) pairs meaning: in row q of the sorted outer
    product, the first r_q columns are covered.  Counts are positive and
    nonincreasing in q.  ``cutoff`` is the rank-(b+1) product value the cover
    was built against; covered entries strictly exceed it except for the
    position-order tie padding.
    """

    u: SortedVector
    v: SortedVector
    rows: tuple
    cutoff: float

    def covered_count(self) -> int:
        return sum(r for _, r in self.rows)

    def validate(self) -> None:
        prev = None
        total = 0
        for q, r in self.rows:
            if r <= 0:
                raise ValueError("row counts must be positive")
            if prev is not None and (q <= prev[0] or r > prev[1]):
                raise ValueError("row counts must be nonincreasing in q")
            prev = (q, r)
            total += r


def _float_bits(x: float) -> int:
    return int(np.float64(x).view(np.int64))


def _bits_float(b: int) -> float:
    return float(np.int64(b).view(np.float64))


def _count_products_ge(u_vals, v_vals, x: float) -> int:
    """Number of pairwise products >= x, for descending vectors and x > 0.

    Two-pointer sweep: the per-row count is nonincreasing, so the column
    pointer only moves left.  Uses the same multiplication as every other
    routine, keeping float comparisons consistent.
    """
    j = len(v_vals)
    count = 0
    for uq in u_vals:
        while j > 0 and not (uq * v_vals[j - 1] >= x):
            j -= 1
        if j == 0:
            break
        count += j
    return count


def _count_products_positive(u_vals, v_vals) -> int:
    j = len(v_vals)
    count = 0
    for uq in u_vals:
        while j > 0 and not (uq * v_vals[j - 1] > 0.0):
            j -= 1
        if j == 0:
            break
        count += j
    return count


def select_rank_outer(u: SortedVector, v: SortedVector, r: int, method: str = "auto") -> float:
    """Value of the r-th largest product u_i * v_j, or 0 if fewer exist.

    Rank counts from the largest.  The bisection method searches the float
    bit ordering, so it terminates on the exact achieved product value; the
    enumeration method materializes and partitions all products.
    """
    if r < 1:
        raise ValueError("rank must be at least 1")
    if method not in ("auto", "enumerate", "bisect"):
        raise ValueError(f"unknown method {method!r}")
    nu, nv = len(u), len(v)
    if nu == 0 or nv == 0:
        return 0.0
    if method == "auto":
        method = "enumerate" if nu * nv <= ENUMERATION_LIMIT else "bisect"
    if method == "enumerate":
        prods = np.outer(u.vals, v.vals).ravel()
        prods = prods[prods > 0.0]
        if r > prods.size:
            return 0.0
        return float(np.partition(prods, prods.size - r)[prods.size - r])
    total = _count_products_positive(u.vals, v.vals)
    if r > total:
        return 0.0
    # Largest x with count_ge(x) >= r is the r-th largest achieved product.
    # Bisect over the bit patterns of positive doubles (order-preserving).
    lo = 1  # smallest positive subnormal
    hi = _float_bits(float(u.vals[0]) * float(v.vals[0]))
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if _count_products_ge(u.vals, v.vals, _bits_float(mid)) >= r:
            lo = mid
        else:
            hi = mid - 1
    return _bits_float(lo)


def enumerate_top(u: SortedVector, v: SortedVector, c: float, b: int) -> TopBList:
    """Cover the entries with product > c, tie-padded to min(b, #nonzero).

    ``c`` must be the rank-(b+1) product value.  Strict coverage then has at
    most b entries; entries equal to c are admitted smallest-position-first
    until the budget fills.  Tie padding is representational only: after the
    cutoff decrement those entries carry weight zero.
    """
    nu, nv = len(u), len(v)
    if nu == 0 or nv == 0 or b <= 0:
        return TopBList(u=u, v=v, rows=(), cutoff=c)

    strict = []  # (q, count of products > c)
    tie_runs = []  # (q, start_col, end_col) of products == c
    j_gt = nv
    j_ge = nv
    for q in range(nu):
        uq = u.vals[q]
        while j_gt > 0 and not (uq * v.vals[j_gt - 1] > c):
            j_gt -= 1
        if j_gt > 0:
            strict.append((q, j_gt))
        if c > 0.0:
            while j_ge > 0 and uq * v.vals[j_ge - 1] < c:
                j_ge -= 1
            if j_ge > j_gt:
                tie_runs.append((q, j_gt, j_ge))
            if j_ge == 0:
                break
        elif j_gt == 0:
            break

    strict_total = sum(r for _, r in strict)
    # When c > 0 at least b+1 products reach c, so the target is exactly b.
    target = b if c > 0.0 else strict_total
    budget = target - strict_total

    admitted = {}
    if budget > 0:
        ties = []
        for q, start, end in tie_runs:
            pu = int(u.pos[q])
            for col in range(start, end):
                ties.append((pu, int(v.pos[col]), q))
        ties.sort()
        for _, _, q in ties[:budget]:
            admitted[q] = admitted.get(q, 0) + 1

    counts = dict(strict)
    for q, extra in admitted.items():
        counts[q] = counts.get(q, 0) + extra
    rows = tuple(sorted(counts.items()))
    out = TopBList(u=u, v=v, rows=rows, cutoff=c)
    out.validate()
    return out


def _merge_by_pos(left, right, pos):
    """Merge two column-index lists, each sorted by ascending pos[col]."""
    out = []
    i = j = 0
    while i < len(left) and j < len(right):
        if pos[left[i]] < pos[right[j]]:
            out.append(left[i])
            i += 1
        else:
            out.append(right[j])
            j += 1
    out.extend(left[i:])
    out.extend(right[j:])
    return out


def position_sort(top: TopBList):
    """Covered entries in position order, weights decreased by the cutoff.

    Returns ((i, j), weight) tuples with original indices; zero weights (the
    tie padding) are dropped.  Rows are incremental prefixes of the same
    column vector, so instead of one global sort we sort only the columns new
    to each row and merge, then order rows by their original u position.
    """
    rows = top.rows
    if not rows:
        return []
    u, v, c = top.u, top.v, top.cutoff

    per_row_cols = {}
    acc = []
    prev_r = 0
    for q, r in reversed(rows):  # shortest coverage first
        new_cols = sorted(range(prev_r, r), key=lambda col: v.pos[col])
        acc = _merge_by_pos(acc, new_cols, v.pos)
        per_row_cols[q] = list(acc)
        prev_r = r

    out = []
    for q, _ in sorted(rows, key=lambda t: u.pos[t[0]]):
        uq = float(u.vals[q])
        pu = int(u.pos[q])
        for col in per_row_cols[q]:
            w = uq * float(v.vals[col]) - c
            if w > 0.0:
                out.append(((pu, int(v.pos[col])), w))
    return out


def merge_into_summary(summary, entries, b: int | None = None):
    """Fold position-sorted entries into the summary, Frequent style.

    Coinciding keys accumulate.  If the union exceeds b slots, its rank-(b+1)
    weight is subtracted from every member; only entries that stay positive
    survive, which leaves at most b slots and preserves position order.
    """
    if b is None:
        b = summary.b
    elif b != summary.b:
        raise ValueError(f"capacity mismatch: {b} != summary.b={summary.b}")
    if len(entries) > b:
        raise ValueError("at most b entries may be merged per step")
    n = summary.n
    keys = summary._keys
    cnts = summary._cnts
    size = summary._size
    skeys = summary._scratch_keys
    scnts = summary._scratch_cnts

    si = 0
    ei = 0
    m = 0
    while si < size and ei < len(entries):
        (i, j), w = entries[ei]
        ek = i * n + j
        if keys[si] < ek:
            skeys[m] = keys[si]
            scnts[m] = cnts[si]
            si += 1
        elif keys[si] > ek:
            skeys[m] = ek
            scnts[m] = w
            ei += 1
        else:
            skeys[m] = ek
            scnts[m] = cnts[si] + w
            si += 1
            ei += 1
        m += 1
    while si < size:
        skeys[m] = keys[si]
        scnts[m] = cnts[si]
        si += 1
        m += 1
    while ei < len(entries):
        (i, j), w = entries[ei]
        skeys[m] = i * n + j
        scnts[m] = w
        ei += 1
        m += 1

    wprime = 0.0
    if m > b:
        union = scnts[:m]
        wprime = float(np.partition(union.copy(), m - b - 1)[m - b - 1])
        kept = 0
        for t in range(m):
            w = scnts[t] - wprime
            if w > 0.0:
                keys[kept] = skeys[t]
                cnts[kept] = w
                kept += 1
        size = kept
    else:
        keys[:m] = skeys[:m]
        cnts[:m] = scnts[:m]
        size = m

    summary._size = size
    summary._invalidate()
    if summary.stats is not None:
        summary.stats.record_merge(wprime, m)
    return summary
