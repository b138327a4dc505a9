"""Summary slot semantics: queries, global decrements, exports."""

import io as stdio

import pytest

from skewprod import EntrySummary


class TestQueries:
    def test_missing_entry_is_zero(self):
        s = EntrySummary.from_pairs(4, 8, [((1, 2), 3.0)])
        assert s.estimate_entry(1, 2) == 3.0
        assert s.estimate_entry(5, 5) == 0.0

    def test_out_of_range_raises(self):
        s = EntrySummary(2, 4)
        with pytest.raises(IndexError):
            s.estimate_entry(4, 0)
        with pytest.raises(IndexError):
            s.estimate_entry(0, -1)

    def test_lookup_survives_freeze(self):
        s = EntrySummary.from_pairs(2, 4, [((0, 3), 1.5)])
        s.freeze()
        assert s.estimate_entry(0, 3) == 1.5


class TestDecrementAll:
    def test_evicts_zeroed_counters(self):
        s = EntrySummary.from_pairs(4, 4, [((0, 0), 5.0), ((1, 1), 3.0)])
        s.decrement_all(3.0)
        assert dict(s.entries()) == {(0, 0): 2.0}

    def test_zero_delta_is_noop(self):
        s = EntrySummary.from_pairs(4, 4, [((0, 0), 5.0)])
        s.decrement_all(0.0)
        assert dict(s.entries()) == {(0, 0): 5.0}

    def test_empty_summary(self):
        s = EntrySummary(4, 4)
        s.decrement_all(2.0)
        assert len(s) == 0

    def test_clamps_and_evicts_below_zero(self):
        s = EntrySummary.from_pairs(4, 4, [((0, 0), 1.0), ((2, 2), 9.0)])
        s.decrement_all(2.0)
        assert dict(s.entries()) == {(2, 2): 7.0}

    def test_order_preserved(self):
        pairs = [((0, 1), 4.0), ((1, 0), 6.0), ((3, 3), 2.5)]
        s = EntrySummary.from_pairs(4, 4, pairs)
        s.decrement_all(1.0)
        keys = [k for k, _ in s.entries()]
        assert keys == sorted(keys)


class TestExports:
    def test_empty_sparse(self):
        s = EntrySummary(4, 4)
        assert s.to_sparse_matrix().triples == ()

    def test_singleton_sparse(self):
        s = EntrySummary.from_pairs(4, 4, [((0, 1), 2.5)])
        assert s.to_sparse_matrix().triples == ((0, 1, 2.5),)

    def test_csv_dump_in_position_order(self):
        s = EntrySummary.from_pairs(4, 4, [((1, 0), 2.0), ((0, 3), 1.0)])
        buf = stdio.StringIO()
        s.write_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "i,j,estimate"
        assert lines[1].startswith("0,3,")
        assert lines[2].startswith("1,0,")

    def test_csv_stable(self):
        s = EntrySummary.from_pairs(4, 8, [((2, 5), 1.0 / 3.0), ((7, 7), 0.1)])
        a, b = stdio.StringIO(), stdio.StringIO()
        s.write_csv(a)
        s.write_csv(b)
        assert a.getvalue() == b.getvalue()


class TestConstruction:
    def test_rejects_overfull(self):
        with pytest.raises(ValueError):
            EntrySummary.from_pairs(1, 4, [((0, 0), 1.0), ((1, 1), 1.0)])

    def test_rejects_nonpositive_counter(self):
        with pytest.raises(ValueError):
            EntrySummary.from_pairs(2, 4, [((0, 0), 0.0)])

    def test_rejects_duplicates(self):
        with pytest.raises(ValueError):
            EntrySummary.from_pairs(2, 4, [((0, 0), 1.0), ((0, 0), 2.0)])

    def test_rejects_bad_capacity(self):
        with pytest.raises(ValueError):
            EntrySummary(0, 4)
