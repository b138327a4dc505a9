"""File formats, transaction databases, and synthetic instance generators.

Formats:
  dense matrix   first line "n", then n lines of n whitespace-separated reals
  sparse matrix  first line "n nnz", then nnz lines "i j w"
  transactions   one transaction per line, whitespace-separated integer item
                 ids (the FIMI repository layout); empty lines are skipped

All generators take an explicit seed and use numpy's default_rng (PCG64), so
every synthetic instance is replayable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import DenseMatrix, SparseMatrix


def write_dense_matrix(m: DenseMatrix, fh) -> None:
    fh.write(f"{m.n}\n")
    for i in range(m.n):
        fh.write(" ".join(repr(float(x)) for x in m.values[i, :]) + "\n")


def read_dense_matrix(fh, layout: str = "row-major", nonnegative: bool = False) -> DenseMatrix:
    header = fh.readline().split()
    if len(header) != 1:
        raise ValueError("dense matrix file must start with a single dimension")
    n = int(header[0])
    rows = []
    for i in range(n):
        parts = fh.readline().split()
        if len(parts) != n:
            raise ValueError(f"row {i} has {len(parts)} values, expected {n}")
        rows.append([float(x) for x in parts])
    return DenseMatrix(rows, layout=layout, nonnegative=nonnegative)


def write_sparse_matrix(m: SparseMatrix, fh) -> None:
    fh.write(f"{m.n} {m.nnz}\n")
    for i, j, w in m.triples:
        fh.write(f"{i} {j} {float(w)!r}\n")


def read_sparse_matrix(fh) -> SparseMatrix:
    header = fh.readline().split()
    if len(header) != 2:
        raise ValueError('sparse matrix file must start with "n nnz"')
    n, nnz = int(header[0]), int(header[1])
    triples = []
    for _ in range(nnz):
        i, j, w = fh.readline().split()
        triples.append((int(i), int(j), float(w)))
    return SparseMatrix(n=n, triples=tuple(triples))


@dataclass(frozen=True)
class TransactionDB:
    """Transactions over an integer item ground set, with occurrence counts."""

    m: int
    items: int
    transactions: tuple
    item_freq: tuple

    def __post_init__(self):
        for t in self.transactions:
            for i in t:
                if not (0 <= i < self.items):
                    raise ValueError(f"item {i} outside ground set of size {self.items}")


def parse_fimi(fh) -> TransactionDB:
    """Read a transaction database; one whitespace-separated line each."""
    transactions = []
    max_item = -1
    for lineno, line in enumerate(fh, start=1):
        parts = line.split()
        if not parts:
            continue
        try:
            ids = tuple(int(tok) for tok in parts)
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer item id") from None
        for i in ids:
            if i < 0:
                raise ValueError(f"line {lineno}: negative item id {i}")
        transactions.append(ids)
        max_item = max(max_item, max(ids))
    if not transactions:
        raise ValueError("empty transaction database")
    items = max_item + 1
    freq = [0] * items
    for t in transactions:
        for i in set(t):
            freq[i] += 1
    return TransactionDB(m=len(transactions), items=items,
                         transactions=tuple(transactions), item_freq=tuple(freq))


def serialize_fimi(db: TransactionDB, fh) -> None:
    for t in db.transactions:
        fh.write(" ".join(str(i) for i in t) + "\n")


def build_lift_matrix(db: TransactionDB):
    """Dense items-by-transactions occurrence matrix scaled by 1/frequency.

    Returns (A, A^T) padded to the square dimension max(items, m); the
    product A A^T then holds the lift similarity |S_i ∩ S_j| / (|S_i| |S_j|)
    at entry (i, j).
    """
    n = max(db.items, db.m)
    a = np.zeros((n, n))
    for j, t in enumerate(db.transactions):
        for i in set(t):
            a[i, j] = 1.0 / db.item_freq[i]
    left = DenseMatrix(a, layout="column-major", nonnegative=True)
    right = DenseMatrix(a.T, layout="row-major", nonnegative=True)
    return left, right


def lift_factors(db: TransactionDB):
    """Per-transaction sparse outer-product factors for the streaming path.

    Each transaction contributes the outer product of the same sparse vector
    (1/f_i at the items it contains) with itself over the items domain.
    """
    for t in db.transactions:
        ids = np.array(sorted(set(t)), dtype=np.int64)
        vals = np.array([1.0 / db.item_freq[i] for i in ids])
        yield vals, ids, vals, ids


def zipf_total(z: float, count: int) -> float:
    """Truncated zeta normalizer: sum of i^-z for i = 1..count."""
    return math.fsum((i ** -z) for i in range(1, count + 1))


def gen_zipf_product(n: int, z: float, nnz: int, seed: int,
                     total_weight: float = 1.0):
    """A factor pair whose product has nnz Zipf(z)-weighted entries.

    The weight of the rank-i entry is total_weight / (zeta(z) * i^z) with the
    normalizer truncated at nnz terms; positions are drawn uniformly without
    replacement.  The pair is (C, I), so the product equals the planted
    matrix and the skew lives in the output, not the inputs.
    """
    if z <= 1:
        raise ValueError("the skew analysis needs z > 1")
    if not (0 <= nnz <= n * n):
        raise ValueError(f"nnz must lie in [0, {n * n}]")
    c = np.zeros((n, n))
    if nnz:
        rng = np.random.default_rng(seed)
        positions = rng.choice(n * n, size=nnz, replace=False)
        zeta = zipf_total(z, nnz)
        for rank, pos in enumerate(positions, start=1):
            c[pos // n, pos % n] = total_weight / (zeta * rank ** z)
    a = DenseMatrix(c, layout="column-major", nonnegative=True)
    b = DenseMatrix(np.eye(n), layout="row-major", nonnegative=True)
    return a, b
