"""Benchmark the per-outer-product summary kernel: compiled vs pure Python.

Runs the full summary pass on dense random and Zipf-skewed instances at a few
sizes and prints per-backend wall time plus the speedup.  Also times the two
convolution paths of the residue histogram for context.

Usage: python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import time

import numpy as np

from skewprod import DenseMatrix, compute_summary, gen_zipf_product, residue_histogram
from skewprod.kernels import HAVE_COMPILED


def time_call(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def dense_instance(n, seed):
    rng = np.random.default_rng(seed)
    a = DenseMatrix(rng.random((n, n)), nonnegative=True)
    b = DenseMatrix(rng.random((n, n)), nonnegative=True)
    return a, b


def bench_summary(quick=False):
    cases = [("dense", 64, 128), ("dense", 128, 256), ("zipf", 128, 256)]
    if not quick:
        cases += [("dense", 256, 512), ("zipf", 256, 512), ("dense", 256, 2048)]
    repeats = 2 if quick else 3

    print(f"compiled kernel available: {HAVE_COMPILED}")
    print(f"{'instance':>16} {'n':>5} {'b':>5} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for kind, n, cap in cases:
        if kind == "zipf":
            a, b = gen_zipf_product(n, 1.5, n * n // 4, seed=1)
        else:
            a, b = dense_instance(n, seed=1)
        t_py = time_call(lambda: compute_summary(a, b, cap, backend="python"), repeats)
        if HAVE_COMPILED:
            t_c = time_call(lambda: compute_summary(a, b, cap, backend="compiled"), repeats)
            s_py = compute_summary(a, b, cap, backend="python")
            s_c = compute_summary(a, b, cap, backend="compiled")
            assert sorted(s_py.entries()) == sorted(s_c.entries()), "backends disagree"
            print(f"{kind:>16} {n:>5} {cap:>5} {t_py:>9.3f}s {t_c:>9.3f}s {t_py / t_c:>7.1f}x")
        else:
            print(f"{kind:>16} {n:>5} {cap:>5} {t_py:>9.3f}s {'-':>10} {'-':>8}")


def bench_convolution(quick=False):
    rng = np.random.default_rng(2)
    print(f"\n{'residue histogram':>16} {'p':>5} {'naive':>10} {'fft':>10}")
    for p in (31, 127, 509) if not quick else (31, 127):
        a = rng.random(256)
        b = rng.random(256)
        t_naive = time_call(lambda: [residue_histogram(a, b, p, method="naive") for _ in range(50)])
        t_fft = time_call(lambda: [residue_histogram(a, b, p, method="fft") for _ in range(50)])
        print(f"{'x50':>16} {p:>5} {t_naive:>9.3f}s {t_fft:>9.3f}s")


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller cases only")
    args = parser.parse_args()
    bench_summary(args.quick)
    bench_convolution(args.quick)
