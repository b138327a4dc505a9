"""Deterministic sketches for matrix products.

Two pipelines share the column-row decomposition of a product into n outer
products.  For nonnegative inputs, a capacity-b Frequent-style summary yields
entry estimates with one-sided additive error ||C||_E1 / b and much better
under skew.  For arbitrary real inputs, prime-residue group testing with
per-bit majority counters recovers the heaviest (or all, when sparse) entries
exactly in two passes.
"""

from .approx import (
    ApproxRunConfig,
    BoundCheck,
    ErrorReport,
    compute_summary,
    compute_summary_stream,
    error_curve,
    error_report,
)
from .grouptest import (
    CandidateEntry,
    GroupTables,
    PrimeSchedule,
    build_prime_schedule,
    check_candidates,
    compute_groups,
    majority_stream,
    multi_pass_topk,
    recover_heavy,
    residue_histogram,
)
from .io import (
    TransactionDB,
    build_lift_matrix,
    gen_zipf_product,
    lift_factors,
    parse_fimi,
    read_dense_matrix,
    read_sparse_matrix,
    serialize_fimi,
    write_dense_matrix,
    write_sparse_matrix,
)
from .kernels import DEFAULT_BACKEND, HAVE_COMPILED
from .linalg import (
    DenseMatrix,
    NormReport,
    SparseMatrix,
    entrywise_norm,
    multiply_exact,
    position_index,
    rank_of,
    residual_norm_profile,
)
from .outer import (
    SortedVector,
    TopBList,
    enumerate_top,
    merge_into_summary,
    position_sort,
    select_rank_outer,
)
from .summary import EntrySummary, SummaryStats

__version__ = "0.1.0"

__all__ = [
    "ApproxRunConfig",
    "BoundCheck",
    "CandidateEntry",
    "DEFAULT_BACKEND",
    "DenseMatrix",
    "EntrySummary",
    "ErrorReport",
    "GroupTables",
    "HAVE_COMPILED",
    "NormReport",
    "PrimeSchedule",
    "SortedVector",
    "SparseMatrix",
    "SummaryStats",
    "TopBList",
    "TransactionDB",
    "build_lift_matrix",
    "build_prime_schedule",
    "check_candidates",
    "compute_groups",
    "compute_summary",
    "compute_summary_stream",
    "entrywise_norm",
    "enumerate_top",
    "error_curve",
    "error_report",
    "gen_zipf_product",
    "lift_factors",
    "majority_stream",
    "merge_into_summary",
    "multi_pass_topk",
    "multiply_exact",
    "parse_fimi",
    "position_index",
    "position_sort",
    "rank_of",
    "read_dense_matrix",
    "read_sparse_matrix",
    "recover_heavy",
    "residual_norm_profile",
    "residue_histogram",
    "select_rank_outer",
    "serialize_fimi",
    "write_dense_matrix",
    "write_sparse_matrix",
]
