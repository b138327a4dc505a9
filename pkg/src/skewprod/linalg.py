"""Matrix storage, the exact multiplication oracle, and norm/rank computations.

Everything downstream measures itself against these primitives, so they favor
clarity and numerical care over speed.  The one global convention fixed here
is the *position total order*: entry (i1, j1) precedes (i2, j2) iff
i1*n + j1 < i2*n + j2.  Every deterministic tie-break in the package routes
through this order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LAYOUTS = ("row-major", "column-major")


class DenseMatrix:
    """Square real matrix with a declared storage layout.

    Values are frozen after construction; all operations on matrices are pure
    functions and safe to call concurrently.
    """

    __slots__ = ("values", "n", "layout", "nonnegative")

    def __init__(self, values, layout: str = "row-major", nonnegative: bool = False):
        if layout not in LAYOUTS:
            raise ValueError(f"unknown layout {layout!r}")
        order = "F" if layout == "column-major" else "C"
        arr = np.array(values, dtype=np.float64, order=order)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {arr.shape}")
        if nonnegative and arr.size and float(arr.min()) < 0.0:
            raise ValueError("matrix declared nonnegative contains a negative value")
        arr.flags.writeable = False
        self.values = arr
        self.n = int(arr.shape[0])
        self.layout = layout
        self.nonnegative = nonnegative

    def column(self, i: int) -> np.ndarray:
        return self.values[:, i]

    def row(self, i: int) -> np.ndarray:
        return self.values[i, :]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DenseMatrix)
            and self.n == other.n
            and bool(np.array_equal(self.values, other.values))
        )

    def __repr__(self) -> str:
        return f"DenseMatrix(n={self.n}, layout={self.layout!r})"


@dataclass(frozen=True)
class SparseMatrix:
    """Triple list representation; entries not listed are zero."""

    n: int
    triples: tuple

    def __post_init__(self):
        seen = set()
        for i, j, _ in self.triples:
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"index ({i}, {j}) out of range for n={self.n}")
            if (i, j) in seen:
                raise ValueError(f"duplicate position ({i}, {j})")
            seen.add((i, j))

    @property
    def nnz(self) -> int:
        return len(self.triples)

    def to_dense(self, layout: str = "row-major") -> DenseMatrix:
        out = np.zeros((self.n, self.n))
        for i, j, w in self.triples:
            out[i, j] = w
        return DenseMatrix(out, layout=layout)


@dataclass(frozen=True)
class NormReport:
    """Result of an entrywise norm computation; residual_k = 0 is the full norm."""

    p: int
    value: float
    residual_k: int


def position_index(i: int, j: int, n: int) -> int:
    """Rank of entry (i, j) in the position total order over an n x n matrix."""
    return i * n + j


def multiply_exact(a: DenseMatrix, b: DenseMatrix) -> DenseMatrix:
    """Exact product, used as the verification oracle throughout.

    Delegates to numpy; for integer-valued inputs within float64 range the
    result is exact regardless of summation order.
    """
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")
    return DenseMatrix(a.values @ b.values, layout="row-major")


def entrywise_norm(c: DenseMatrix, p: int, k: int = 0) -> NormReport:
    """Entrywise p-norm of ``c`` after zeroing its k largest-magnitude entries.

    Ties among equal absolute values are broken by position order, so the set
    of dropped entries is deterministic.  Accumulation uses compensated
    summation (math.fsum).
    """
    if p < 1:
        raise ValueError("p must be a positive integer")
    n2 = c.n * c.n
    if not (0 <= k < n2):
        raise ValueError(f"k must satisfy 0 <= k < n^2 = {n2}")
    mags = np.abs(c.values).ravel()
    if k:
        # sort by (|value| desc, position asc) and drop the first k
        order = np.lexsort((np.arange(n2), -mags))
        mags = mags[order[k:]]
    if p == 1:
        value = math.fsum(mags.tolist())
    else:
        value = math.fsum((mags**p).tolist()) ** (1.0 / p)
    return NormReport(p=p, value=value, residual_k=k)


def residual_norm_profile(c: DenseMatrix, p: int = 1) -> np.ndarray:
    """All k-residual entrywise p-norms at once: out[k] = ||c||_{E^k p}.

    Shares the tie-break of :func:`entrywise_norm`; out has length n^2.
    """
    n2 = c.n * c.n
    mags = np.abs(c.values).ravel()
    order = np.lexsort((np.arange(n2), -mags))
    ranked = mags[order] ** p if p != 1 else mags[order]
    # suffix[k] = sum of all but the k largest powered magnitudes
    suffix = np.cumsum(ranked[::-1])[::-1]
    return suffix if p == 1 else suffix ** (1.0 / p)


def rank_of(a: float, m: DenseMatrix) -> int:
    """Number of entries of ``m`` strictly smaller than ``a``, plus one.

    This counts from the smallest value; the outer-product machinery uses the
    opposite (largest-first) rank and says so explicitly.
    """
    if a <= 0:
        raise ValueError("rank is defined for positive values only")
    return int(np.count_nonzero(m.values < a)) + 1
