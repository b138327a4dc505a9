"""Backend selection for the per-outer-product summary update.

The update is the hot loop of the whole nonnegative pipeline, so it ships in
two forms: a compiled Cython kernel and a pure Python twin that composes the
operations in :mod:`skewprod.outer`.  The compiled form is preferred when the
extension built; set ``SKEWPROD_PURE_PYTHON=1`` to force the fallback.  Both
produce bit-identical summaries.
"""

from __future__ import annotations

import os

import numpy as np

from . import outer

try:
    from . import _summary_fast
except ImportError:  # extension not built
    _summary_fast = None

_FORCE_PURE = os.environ.get("SKEWPROD_PURE_PYTHON", "") not in ("", "0")

HAVE_COMPILED = _summary_fast is not None
DEFAULT_BACKEND = "compiled" if (HAVE_COMPILED and not _FORCE_PURE) else "python"


def outer_step_python(summary, u_vals, u_pos, v_vals, v_pos) -> None:
    """One Frequent step for a single outer product, pure Python path.

    Inputs are the nonzero values and positions of one column of A and the
    matching row of B; they need not be sorted.
    """
    su = outer.SortedVector.from_pairs(zip(u_vals, u_pos))
    sv = outer.SortedVector.from_pairs(zip(v_vals, v_pos))
    b = summary.b
    cutoff = outer.select_rank_outer(su, sv, b + 1)
    if summary.stats is not None:
        touched = outer._count_products_positive(su.vals, sv.vals) if cutoff > 0 else 0
        summary.stats.record_outer(cutoff, touched)
    top = outer.enumerate_top(su, sv, cutoff, b)
    entries = outer.position_sort(top)
    outer.merge_into_summary(summary, entries, b)


def outer_step_compiled(summary, u_vals, u_pos, v_vals, v_pos) -> None:
    """Same step through the Cython kernel."""
    want_stats = summary.stats is not None
    new_size, cutoff, touched, wprime, union = _summary_fast.outer_step(
        summary._keys,
        summary._cnts,
        summary._scratch_keys,
        summary._scratch_cnts,
        summary._size,
        summary.b,
        summary.n,
        np.ascontiguousarray(u_vals, dtype=np.float64),
        np.ascontiguousarray(u_pos, dtype=np.int64),
        np.ascontiguousarray(v_vals, dtype=np.float64),
        np.ascontiguousarray(v_pos, dtype=np.int64),
        want_stats,
    )
    summary._size = new_size
    summary._invalidate()
    if want_stats:
        summary.stats.record_outer(cutoff, touched)
        summary.stats.record_merge(wprime, union)


def resolve_step(backend: str = "auto"):
    """Map a backend name to a step function."""
    if backend == "auto":
        backend = DEFAULT_BACKEND
    if backend == "compiled":
        if _summary_fast is None:
            raise RuntimeError("compiled kernel is not available; rebuild or use backend='python'")
        return outer_step_compiled
    if backend == "python":
        return outer_step_python
    raise ValueError(f"unknown backend {backend!r}")


def backend_name(backend: str = "auto") -> str:
    if backend == "auto":
        return DEFAULT_BACKEND
    return backend
