"""The full summary pass and its guarantees, checked entrywise against the
exact product for every random instance.  These bounds are theorems: a single
violation beyond float slack is a bug, so no instance-dependent tolerances."""

import numpy as np
import pytest

from skewprod import (
    ApproxRunConfig,
    DenseMatrix,
    SummaryStats,
    compute_summary,
    compute_summary_stream,
    entrywise_norm,
    error_curve,
    error_report,
    multiply_exact,
)
from skewprod.kernels import HAVE_COMPILED


def random_nonneg(rng, n, density=0.6, scale=5.0):
    vals = rng.random((n, n)) * scale * (rng.random((n, n)) < density)
    return DenseMatrix(vals, nonnegative=True)


def envelope_holds(a, b, bcap, backend="auto"):
    c = multiply_exact(a, b).values
    e1 = float(np.abs(c).sum())
    slack = 1e-9 * max(1.0, e1)
    est = compute_summary(a, b, bcap, backend=backend).to_dense_array()
    lower = np.maximum(c - e1 / bcap, 0.0)
    return bool((est <= c + slack).all() and (est >= lower - slack).all())


class TestComputeSummary:
    def test_identity_is_exact(self):
        i8 = DenseMatrix(np.eye(8), nonnegative=True)
        s = compute_summary(i8, i8, 8)
        assert dict(s.entries()) == {(i, i): 1.0 for i in range(8)}

    def test_all_ones_exact_when_capacity_covers_support(self):
        # capacity must stay below n^2, so plant a 4x4 all-ones block in an
        # 8x8 domain; b = 16 holds every product entry and nothing is evicted
        vals = np.zeros((8, 8))
        vals[:4, :4] = 1.0
        ones = DenseMatrix(vals, nonnegative=True)
        s = compute_summary(ones, ones, 16)
        c = multiply_exact(ones, ones).values
        assert np.array_equal(s.to_dense_array(), c)

    def test_rejects_negative_values(self):
        a = DenseMatrix([[1.0, 0.0], [0.0, -1.0]])
        i2 = DenseMatrix(np.eye(2), nonnegative=True)
        with pytest.raises(ValueError):
            compute_summary(a, i2, 2)

    def test_rejects_capacity_bounds(self):
        i2 = DenseMatrix(np.eye(2), nonnegative=True)
        with pytest.raises(ValueError):
            compute_summary(i2, i2, 4)
        with pytest.raises(ValueError):
            compute_summary(i2, i2, 0)

    def test_envelope_random_instances(self):
        rng = np.random.default_rng(30)
        for _ in range(30):
            n = int(rng.integers(2, 20))
            bcap = int(rng.integers(1, n * n))
            a = random_nonneg(rng, n)
            b = random_nonneg(rng, n)
            assert envelope_holds(a, b, bcap), f"n={n} b={bcap}"

    def test_permutation_invariance_of_bounds(self):
        # integer weights so the permuted product is exactly the original
        rng = np.random.default_rng(31)
        a = DenseMatrix(rng.integers(0, 6, size=(10, 10)).astype(float), nonnegative=True)
        b = DenseMatrix(rng.integers(0, 6, size=(10, 10)).astype(float), nonnegative=True)
        for _ in range(5):
            perm = rng.permutation(10)
            ap = DenseMatrix(a.values[:, perm], nonnegative=True)
            bp = DenseMatrix(b.values[perm, :], nonnegative=True)
            assert multiply_exact(ap, bp) == multiply_exact(a, b)
            assert envelope_holds(ap, bp, 7)

    def test_decrement_events_touch_enough_entries(self):
        rng = np.random.default_rng(32)
        for _ in range(10):
            n = int(rng.integers(3, 12))
            bcap = int(rng.integers(1, min(2 * n, n * n)))
            stats = SummaryStats()
            compute_summary(random_nonneg(rng, n, density=0.9),
                            random_nonneg(rng, n, density=0.9),
                            bcap, stats=stats)
            assert stats.outer_events, "instrumentation must record steps"
            for amount, touched in stats.outer_events:
                assert amount == 0.0 or touched >= bcap + 1
            for amount, touched in stats.merge_events:
                assert amount == 0.0 or touched >= bcap + 1

    def test_summary_structure_after_pass(self):
        # at most b slots, positive counters, keys strictly increasing
        rng = np.random.default_rng(39)
        for _ in range(10):
            n = int(rng.integers(2, 16))
            bcap = int(rng.integers(1, n * n))
            s = compute_summary(random_nonneg(rng, n), random_nonneg(rng, n), bcap)
            entries = list(s.entries())
            assert len(entries) <= bcap
            assert all(w > 0 for _, w in entries)
            keys = [i * n + j for (i, j), _ in entries]
            assert keys == sorted(set(keys))

    def test_stream_variant_matches_dense(self):
        rng = np.random.default_rng(33)
        a = random_nonneg(rng, 8)
        b = random_nonneg(rng, 8)

        def factors():
            for i in range(8):
                col = a.values[:, i]
                row = b.values[i, :]
                cnz = np.nonzero(col)[0]
                rnz = np.nonzero(row)[0]
                yield col[cnz], cnz, row[rnz], rnz

        s1 = compute_summary(a, b, 10)
        s2 = compute_summary_stream(factors(), 8, 10)
        assert sorted(s1.entries()) == sorted(s2.entries())


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled kernel not built")
class TestBackendEquivalence:
    def test_identical_summaries(self):
        rng = np.random.default_rng(34)
        for _ in range(25):
            n = int(rng.integers(2, 24))
            bcap = int(rng.integers(1, n * n))
            a = random_nonneg(rng, n, density=float(rng.uniform(0.2, 1.0)))
            b = random_nonneg(rng, n, density=float(rng.uniform(0.2, 1.0)))
            s_py = compute_summary(a, b, bcap, backend="python")
            s_c = compute_summary(a, b, bcap, backend="compiled")
            assert sorted(s_py.entries()) == sorted(s_c.entries()), f"n={n} b={bcap}"

    def test_identical_stats(self):
        rng = np.random.default_rng(35)
        a = random_nonneg(rng, 12, density=0.9)
        b = random_nonneg(rng, 12, density=0.9)
        st_py, st_c = SummaryStats(), SummaryStats()
        compute_summary(a, b, 9, backend="python", stats=st_py)
        compute_summary(a, b, 9, backend="compiled", stats=st_c)
        assert st_py.outer_events == st_c.outer_events
        assert st_py.merge_events == st_c.merge_events


class TestErrorReport:
    def test_exact_summary_measures_zero(self):
        i8 = DenseMatrix(np.eye(8), nonnegative=True)
        s = compute_summary(i8, i8, 8)
        rep = error_report(multiply_exact(i8, i8), s, ApproxRunConfig(b=8, p=2, k_list=(2,)))
        assert rep.max_underestimation == 0.0
        assert not rep.violations

    def test_additive_bound_value(self):
        rng = np.random.default_rng(36)
        a = random_nonneg(rng, 6)
        b = random_nonneg(rng, 6)
        c = multiply_exact(a, b)
        s = compute_summary(a, b, 5)
        rep = error_report(c, s, ApproxRunConfig(b=5))
        row = next(r for r in rep.checks if r.name == "additive_total")
        assert row.bound == pytest.approx(entrywise_norm(c, 1).value / 5, rel=1e-12)

    def test_recovery_row_present_and_satisfied(self):
        rng = np.random.default_rng(37)
        a = random_nonneg(rng, 12)
        b = random_nonneg(rng, 12)
        c = multiply_exact(a, b)
        s = compute_summary(a, b, 12)
        rep = error_report(c, s, ApproxRunConfig(b=12, p=2, k_list=(4,)))
        names = [r.name for r in rep.checks]
        assert "recovery_p2_k4" in names
        assert not rep.violations

    def test_capacity_mismatch_rejected(self):
        i4 = DenseMatrix(np.eye(4), nonnegative=True)
        s = compute_summary(i4, i4, 4)
        with pytest.raises(ValueError):
            error_report(multiply_exact(i4, i4), s, ApproxRunConfig(b=8))


class TestErrorCurve:
    def test_measured_below_bounds_and_monotone_bound(self):
        rng = np.random.default_rng(38)
        a = random_nonneg(rng, 8)
        b = random_nonneg(rng, 8)
        rows = error_curve(a, b, [2, 4, 8, 16, 32])
        for bcap, measured, bound_e1, bound_resid in rows:
            assert measured <= bound_e1 + 1e-9 * max(1.0, bound_e1)
            assert measured <= bound_resid + 1e-9 * max(1.0, bound_resid)
        bounds = [r[2] for r in rows]
        assert bounds == sorted(bounds, reverse=True)
