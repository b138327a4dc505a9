"""End-to-end summary computation over the n outer products, plus the error
report that compares a finished summary against the exact product.

The driver is a single pass: column i of A and row i of B are read exactly at
step i and never again.  Steps must run sequentially; the summary contents
depend on the order of outer products even though the proved error envelope
does not.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .linalg import DenseMatrix, entrywise_norm, residual_norm_profile
from .summary import EntrySummary, SummaryStats

RELATIVE_SLACK = 1e-9  # float slack applied to bound checks, scaled by ||C||_E1


@dataclass(frozen=True)
class ApproxRunConfig:
    """Parameters for an error report: capacity, norm order, residual ranks."""

    b: int
    p: int = 2
    k_list: tuple = (1,)

    def __post_init__(self):
        if self.b < 1:
            raise ValueError("b must be positive")
        if self.p < 1:
            raise ValueError("p must be a positive integer")
        for k in self.k_list:
            if k < 0:
                raise ValueError("residual ranks must be nonnegative")


@dataclass(frozen=True)
class BoundCheck:
    name: str
    measured: float
    bound: float
    satisfied: bool


@dataclass
class ErrorReport:
    """Measured estimation errors next to the guarantees they must satisfy.

    Every check here is a theorem about the algorithm, so ``violations`` being
    nonempty indicates an implementation bug, not an unlucky input.
    """

    checks: list = field(default_factory=list)
    max_underestimation: float = 0.0

    @property
    def violations(self):
        return [c for c in self.checks if not c.satisfied]

    def write_csv(self, fh) -> None:
        fh.write("bound,measured,value,satisfied\n")
        for c in self.checks:
            fh.write(f"{c.name},{c.measured!r},{c.bound!r},{str(c.satisfied).lower()}\n")


def compute_summary(a: DenseMatrix, b_mat: DenseMatrix, b: int,
                    backend: str = "auto", stats: SummaryStats | None = None) -> EntrySummary:
    """Run the Frequent-style pass over the n outer products of a and b_mat."""
    if a.n != b_mat.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b_mat.n}")
    n = a.n
    if not (0 < b < n * n):
        raise ValueError(f"capacity must satisfy 0 < b < n^2, got b={b}, n={n}")
    for name, m in (("A", a), ("B", b_mat)):
        if m.values.size and float(m.values.min()) < 0.0:
            raise ValueError(f"matrix {name} has a negative value")

    summary = EntrySummary(b, n)
    summary.stats = stats
    step = kernels.resolve_step(backend)
    for i in range(n):
        col = a.column(i)
        row = b_mat.row(i)
        unz = np.nonzero(col)[0]
        vnz = np.nonzero(row)[0]
        if unz.size == 0 or vnz.size == 0:
            continue
        step(summary, col[unz], unz.astype(np.int64), row[vnz], vnz.astype(np.int64))
    summary.freeze()
    return summary


def compute_summary_stream(factors, n: int, b: int, backend: str = "auto",
                           stats: SummaryStats | None = None) -> EntrySummary:
    """Same pass over explicit sparse rank-one factors.

    ``factors`` yields (u_vals, u_pos, v_vals, v_pos) per outer product; used
    by the transaction pipeline when the dense matrix would not fit.
    """
    if not (0 < b < n * n):
        raise ValueError(f"capacity must satisfy 0 < b < n^2, got b={b}, n={n}")
    summary = EntrySummary(b, n)
    summary.stats = stats
    step = kernels.resolve_step(backend)
    for u_vals, u_pos, v_vals, v_pos in factors:
        u_vals = np.asarray(u_vals, dtype=np.float64)
        v_vals = np.asarray(v_vals, dtype=np.float64)
        if u_vals.size and float(u_vals.min()) < 0.0:
            raise ValueError("negative weight in outer-product factor")
        if v_vals.size and float(v_vals.min()) < 0.0:
            raise ValueError("negative weight in outer-product factor")
        if u_vals.size == 0 or v_vals.size == 0:
            continue
        step(summary, u_vals, np.asarray(u_pos, dtype=np.int64),
             v_vals, np.asarray(v_pos, dtype=np.int64))
    summary.freeze()
    return summary


def error_report(c: DenseMatrix, summary: EntrySummary, cfg: ApproxRunConfig) -> ErrorReport:
    """Compare the summary against the exact product under every bound.

    ``c`` must be the exact product of the matrices the summary was built
    from.  Emits one check per bound; see the CSV for (bound, measured,
    value, satisfied) rows.
    """
    if c.n != summary.n:
        raise ValueError("dimension mismatch between product and summary")
    b = summary.b
    if cfg.b != b:
        raise ValueError(f"config capacity {cfg.b} differs from summary capacity {b}")

    n2 = c.n * c.n
    est = summary.to_dense_array()
    under = c.values - est
    over = float((est - c.values).max(initial=0.0))
    max_under = float(under.max(initial=0.0))
    e1 = entrywise_norm(c, 1).value
    slack = RELATIVE_SLACK * max(1.0, e1)

    checks = [
        BoundCheck("one_sided", over, 0.0, over <= slack),
        BoundCheck("additive_total", max_under, e1 / b, max_under <= e1 / b + slack),
    ]

    profile = residual_norm_profile(c, p=1)
    for k in cfg.k_list:
        if 0 < k < b:
            bound = float(profile[k]) / (b - k)
            checks.append(
                BoundCheck(f"residual_k{k}", max_under, bound, max_under <= bound + slack)
            )

    # Heavy entries: weight alpha*||C||_E1 with alpha*b > 1 get the tighter bound.
    if e1 > 0 and b > 1:
        alpha = c.values / e1
        qualifying = alpha * b > 1.0
        if qualifying.any():
            excess = under[qualifying] - (1.0 - alpha[qualifying]) * e1 / (b - 1)
            worst = float(excess.max())
            checks.append(BoundCheck("heavy_entry_excess", worst, 0.0, worst <= slack))

    # Sparse recovery in the entrywise p-norm, one check per usable k.
    diff = DenseMatrix(c.values - est)
    for k in cfg.k_list:
        if not (0 < k < n2) or b <= 2 * k:
            continue  # needs eps = k/(b-k) < 1
        eps = k / (b - k)
        measured = entrywise_norm(diff, cfg.p).value
        resid = entrywise_norm(c, 1, k).value
        bound = (1.0 + eps) ** (1.0 / cfg.p) * (eps / k) ** (1.0 - 1.0 / cfg.p) * resid
        checks.append(
            BoundCheck(f"recovery_p{cfg.p}_k{k}", measured, bound, measured <= bound + slack)
        )

    return ErrorReport(checks=checks, max_underestimation=max_under)


def error_curve(a: DenseMatrix, b_mat: DenseMatrix, b_values,
                backend: str = "auto"):
    """Max underestimation and its guarantees for a sweep of summary sizes.

    Returns rows (b, measured_error, bound_E1, bound_residual) where the
    residual bound is the best one over all k < b.
    """
    from .linalg import multiply_exact

    c = multiply_exact(a, b_mat)
    e1 = entrywise_norm(c, 1).value
    profile = residual_norm_profile(c, p=1)
    rows = []
    for b in b_values:
        summary = compute_summary(a, b_mat, b, backend=backend)
        est = summary.to_dense_array()
        measured = float((c.values - est).max(initial=0.0))
        ks = np.arange(min(b, len(profile)))
        bound_resid = float((profile[ks] / (b - ks)).min())
        rows.append((b, measured, e1 / b, bound_resid))
    return rows
