"""Command line front end.

Subcommands: gen, approx, recover, lift, report.  Exit codes: 0 success,
1 usage error, 2 data error, 3 bound violation (the latter always indicates
an implementation bug, since every reported bound is a theorem).
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass

from .approx import ApproxRunConfig, compute_summary, compute_summary_stream, error_curve, error_report
from .grouptest import multi_pass_topk, recover_heavy
from .io import (
    build_lift_matrix,
    gen_zipf_product,
    lift_factors,
    parse_fimi,
    read_dense_matrix,
    write_dense_matrix,
)
from .linalg import multiply_exact

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_VIOLATION = 3

DENSE_LIFT_CEILING = 4_000_000  # items*transactions cells above this stream


@dataclass
class CliConfig:
    """Parsed arguments for one invocation."""

    subcommand: str
    b: int = 0
    k: int = 1
    eps: float = 0.5
    p: int = 2
    z: float = 2.0
    s: int = 1
    seed: int = 0
    n: int = 16
    nnz: int = 0
    total_weight: float = 1.0
    input: str | None = None
    input_b: str | None = None
    output: str | None = None
    summary_out: str | None = None
    b_list: str | None = None
    pipeline: str = "approx"
    oracle: bool = False
    parallel: bool = False
    backend: str = "auto"
    dense_ceiling: int = DENSE_LIFT_CEILING


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def build_parser() -> _Parser:
    parser = _Parser(prog="skewprod", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--output", default=None)
        sp.add_argument("--oracle", action="store_true",
                        help="force the exact direct convolution everywhere")
        sp.add_argument("--parallel", action="store_true",
                        help="process primes in concurrent workers")
        sp.add_argument("--backend", default="auto",
                        choices=["auto", "compiled", "python"],
                        help="summary kernel to use")

    sp = sub.add_parser("gen", help="write a synthetic Zipf-product instance")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--z", type=float, default=2.0)
    sp.add_argument("--nnz", type=int, required=True)
    sp.add_argument("--total-weight", dest="total_weight", type=float, default=1.0)
    common(sp)

    sp = sub.add_parser("approx", help="summary plus error report for a nonnegative pair")
    sp.add_argument("--input", required=True, help="instance prefix or matrix file for A")
    sp.add_argument("--input-b", dest="input_b", default=None, help="matrix file for B")
    sp.add_argument("--b", type=int, default=0,
                    help="summary capacity; omit to derive it as k + ceil(k/eps)")
    sp.add_argument("--p", type=int, default=2)
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--eps", type=float, default=0.5)
    sp.add_argument("--summary-out", dest="summary_out", default=None)
    common(sp)

    sp = sub.add_parser("recover", help="exact heavy/nonzero entries of a real pair")
    sp.add_argument("--input", required=True)
    sp.add_argument("--input-b", dest="input_b", default=None)
    sp.add_argument("--b", type=int, default=0,
                    help="sparsity budget; unused by the multi-pass mode (--s > 1)")
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--s", type=int, default=1)
    sp.add_argument("--z", type=float, default=2.0)
    common(sp)

    sp = sub.add_parser("lift", help="run a pipeline on the lift similarities of a transaction db")
    sp.add_argument("--input", required=True, help="FIMI transaction file")
    sp.add_argument("--b", type=int, required=True)
    sp.add_argument("--pipeline", choices=["approx", "recover"], default="approx")
    sp.add_argument("--dense-ceiling", dest="dense_ceiling", type=int,
                    default=DENSE_LIFT_CEILING)
    common(sp)

    sp = sub.add_parser("report", help="error-vs-summary-size curve for a pair")
    sp.add_argument("--input", required=True)
    sp.add_argument("--input-b", dest="input_b", default=None)
    sp.add_argument("--b-list", dest="b_list", default=None,
                    help="comma-separated summary sizes (default: powers of two)")
    common(sp)
    return parser


def parse_args(argv) -> CliConfig:
    ns = build_parser().parse_args(argv)
    cfg = CliConfig(subcommand=ns.subcommand)
    for name in vars(ns):
        setattr(cfg, name, getattr(ns, name))
    return cfg


def _load_pair(cfg: CliConfig, nonnegative: bool):
    """Read (A, B) from --input/--input-b or a gen-produced prefix."""
    path_a, path_b = cfg.input, cfg.input_b
    if path_b is None:
        path_a, path_b = cfg.input + ".a.txt", cfg.input + ".b.txt"
    with open(path_a) as fh:
        a = read_dense_matrix(fh, layout="column-major", nonnegative=nonnegative)
    with open(path_b) as fh:
        b = read_dense_matrix(fh, layout="row-major", nonnegative=nonnegative)
    return a, b


def _open_out(path):
    return open(path, "w") if path else sys.stdout


def _write_entries(entries, fh):
    fh.write("i,j,weight\n")
    for e in entries:
        fh.write(f"{e.i},{e.j},{e.weight!r}\n")


def _cmd_gen(cfg: CliConfig) -> int:
    a, b = gen_zipf_product(cfg.n, cfg.z, cfg.nnz, cfg.seed, cfg.total_weight)
    prefix = cfg.output or "instance"
    with open(prefix + ".a.txt", "w") as fh:
        write_dense_matrix(a, fh)
    with open(prefix + ".b.txt", "w") as fh:
        write_dense_matrix(b, fh)
    return EXIT_OK


def _cmd_approx(cfg: CliConfig) -> int:
    a, b = _load_pair(cfg, nonnegative=True)
    if cfg.b <= 0:
        if not (0 < cfg.eps < 1):
            raise ValueError("deriving b from eps needs 0 < eps < 1")
        cfg.b = cfg.k + math.ceil(cfg.k / cfg.eps)
    summary = compute_summary(a, b, cfg.b, backend=cfg.backend)
    if cfg.summary_out:
        with open(cfg.summary_out, "w") as fh:
            summary.write_csv(fh)
    report = error_report(multiply_exact(a, b), summary,
                          ApproxRunConfig(b=cfg.b, p=cfg.p, k_list=(cfg.k,)))
    out = _open_out(cfg.output)
    try:
        report.write_csv(out)
    finally:
        if out is not sys.stdout:
            out.close()
    if report.violations:
        for v in report.violations:
            sys.stderr.write(f"bound violation: {v.name} measured={v.measured!r} bound={v.bound!r}\n")
        return EXIT_VIOLATION
    return EXIT_OK


def _cmd_recover(cfg: CliConfig) -> int:
    a, b = _load_pair(cfg, nonnegative=False)
    method = "naive" if cfg.oracle else "auto"
    if cfg.s > 1:
        entries = multi_pass_topk(a, b, cfg.k, cfg.s, cfg.z,
                                  method=method, parallel=cfg.parallel)
    else:
        if cfg.b < 2:
            raise ValueError("single-pass recovery needs --b of at least 2")
        entries = recover_heavy(a, b, cfg.b, method=method, parallel=cfg.parallel)
    out = _open_out(cfg.output)
    try:
        _write_entries(entries, out)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _cmd_lift(cfg: CliConfig) -> int:
    with open(cfg.input) as fh:
        db = parse_fimi(fh)
    if cfg.pipeline == "recover":
        a, b = build_lift_matrix(db)
        method = "naive" if cfg.oracle else "auto"
        entries = recover_heavy(a, b, cfg.b, method=method, parallel=cfg.parallel)
        out = _open_out(cfg.output)
        try:
            _write_entries(entries, out)
        finally:
            if out is not sys.stdout:
                out.close()
        return EXIT_OK
    if db.items * db.m > cfg.dense_ceiling:
        summary = compute_summary_stream(lift_factors(db), db.items, cfg.b,
                                         backend=cfg.backend)
    else:
        a, b = build_lift_matrix(db)
        summary = compute_summary(a, b, cfg.b, backend=cfg.backend)
    out = _open_out(cfg.output)
    try:
        summary.write_csv(out)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _cmd_report(cfg: CliConfig) -> int:
    a, b = _load_pair(cfg, nonnegative=True)
    if cfg.b_list:
        b_values = [int(tok) for tok in cfg.b_list.split(",")]
    else:
        b_values = [1 << t for t in range(1, (a.n * a.n - 1).bit_length())
                    if (1 << t) < a.n * a.n]
    rows = error_curve(a, b, b_values, backend=cfg.backend)
    out = _open_out(cfg.output)
    try:
        out.write("b,measured_error,bound_E1,bound_residual\n")
        for b_size, measured, bound_e1, bound_resid in rows:
            out.write(f"{b_size},{measured!r},{bound_e1!r},{bound_resid!r}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    violations = [r for r in rows if r[1] > r[2] + 1e-9 * max(1.0, r[2])]
    return EXIT_VIOLATION if violations else EXIT_OK


def run_cli(cfg: CliConfig) -> int:
    """Dispatch a parsed config; maps data problems to exit code 2."""
    handlers = {
        "gen": _cmd_gen,
        "approx": _cmd_approx,
        "recover": _cmd_recover,
        "lift": _cmd_lift,
        "report": _cmd_report,
    }
    handler = handlers.get(cfg.subcommand)
    if handler is None:
        sys.stderr.write(f"unknown subcommand {cfg.subcommand!r}\n")
        return EXIT_USAGE
    try:
        return handler(cfg)
    except (OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DATA


def main(argv=None) -> None:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except SystemExit as exc:
        sys.exit(exc.code if isinstance(exc.code, int) else EXIT_USAGE)
    sys.exit(run_cli(cfg))


if __name__ == "__main__":
    main()
