"""Ingestion, generators, and the command line surface."""

import io as stdio
import subprocess
import sys

import numpy as np
import pytest

from skewprod import (
    build_lift_matrix,
    compute_summary,
    compute_summary_stream,
    gen_zipf_product,
    lift_factors,
    multiply_exact,
    parse_fimi,
    serialize_fimi,
)
from skewprod.cli import main, parse_args, run_cli

TOY_DB = "0 1\n0 1\n0\n"


class TestParseFimi:
    def test_counts(self):
        db = parse_fimi(stdio.StringIO(TOY_DB))
        assert db.m == 3
        assert db.item_freq == (3, 2)

    def test_single_line(self):
        db = parse_fimi(stdio.StringIO("5\n"))
        assert db.m == 1
        assert db.items == 6
        assert db.item_freq[5] == 1

    def test_trailing_newline_equivalent(self):
        a = parse_fimi(stdio.StringIO("0 1\n2\n"))
        b = parse_fimi(stdio.StringIO("0 1\n2"))
        assert a == b

    def test_empty_lines_skipped(self):
        db = parse_fimi(stdio.StringIO("0 1\n\n  \n2\n"))
        assert db.m == 2

    def test_non_integer_token(self):
        with pytest.raises(ValueError):
            parse_fimi(stdio.StringIO("0 x\n"))

    def test_empty_file(self):
        with pytest.raises(ValueError):
            parse_fimi(stdio.StringIO(""))

    def test_round_trip_normalizes_whitespace_only(self):
        raw = "0  1\n0 1\n0\n"
        db = parse_fimi(stdio.StringIO(raw))
        buf = stdio.StringIO()
        serialize_fimi(db, buf)
        assert buf.getvalue() == TOY_DB
        assert parse_fimi(stdio.StringIO(buf.getvalue())) == db

    def test_frequencies_match_line_scan(self):
        rng = np.random.default_rng(60)
        lines = []
        for _ in range(50):
            ids = sorted(set(rng.integers(0, 20, size=rng.integers(1, 8)).tolist()))
            lines.append(" ".join(map(str, ids)))
        text = "\n".join(lines) + "\n"
        db = parse_fimi(stdio.StringIO(text))
        for i in range(db.items):
            want = sum(1 for line in lines if str(i) in line.split())
            assert db.item_freq[i] == want


class TestLiftMatrix:
    def test_formula_on_toy_db(self):
        db = parse_fimi(stdio.StringIO(TOY_DB))
        a, at = build_lift_matrix(db)
        prod = multiply_exact(a, at)
        assert prod.values[0, 1] == 1.0 / 3.0
        # diagonal is 1/f_i
        assert prod.values[0, 0] == pytest.approx(1.0 / 3.0, rel=1e-15)
        assert prod.values[1, 1] == pytest.approx(1.0 / 2.0, rel=1e-15)

    def test_matches_set_formula(self):
        rng = np.random.default_rng(61)
        lines = []
        for _ in range(30):
            ids = sorted(set(rng.integers(0, 12, size=rng.integers(1, 6)).tolist()))
            lines.append(" ".join(map(str, ids)))
        db = parse_fimi(stdio.StringIO("\n".join(lines)))
        a, at = build_lift_matrix(db)
        prod = multiply_exact(a, at).values
        sets = [set(t) for t in db.transactions]
        for i in range(db.items):
            for j in range(db.items):
                si = [t for t in sets if i in t]
                sj = [t for t in sets if j in t]
                if not si or not sj:
                    continue
                inter = sum(1 for t in sets if i in t and j in t)
                want = inter / (len(si) * len(sj))
                assert prod[i, j] == pytest.approx(want, abs=1e-9)

    def test_empty_db_gives_empty_matrix(self):
        from skewprod import TransactionDB

        db = TransactionDB(m=0, items=0, transactions=(), item_freq=())
        a, at = build_lift_matrix(db)
        assert a.n == 0 and at.n == 0

    def test_streaming_factors_match_dense(self):
        # streaming works over the items domain, dense over max(items, m);
        # the outer products coincide so the summaries must too
        db = parse_fimi(stdio.StringIO(TOY_DB))
        a, at = build_lift_matrix(db)
        dense = compute_summary(a, at, 3)
        streamed = compute_summary_stream(lift_factors(db), db.items, 3)
        dense_entries = {k: w for k, w in dense.entries() if k[0] < db.items and k[1] < db.items}
        assert dict(streamed.entries()) == dense_entries


class TestZipfGenerator:
    def test_weights_formula(self):
        a, b = gen_zipf_product(3, 2.0, 3, seed=0)
        weights = sorted(a.values[a.values > 0].tolist(), reverse=True)
        assert weights == pytest.approx([36 / 49, 9 / 49, 4 / 49], rel=1e-12)

    def test_empty_support(self):
        a, b = gen_zipf_product(4, 2.0, 0, seed=0)
        assert not a.values.any()

    def test_deterministic_for_seed(self):
        a1, _ = gen_zipf_product(8, 1.5, 10, seed=7)
        a2, _ = gen_zipf_product(8, 1.5, 10, seed=7)
        assert np.array_equal(a1.values, a2.values)
        a3, _ = gen_zipf_product(8, 1.5, 10, seed=8)
        assert not np.array_equal(a1.values, a3.values)

    def test_rejects_light_skew(self):
        with pytest.raises(ValueError):
            gen_zipf_product(4, 1.0, 4, seed=0)

    def test_product_is_planted_matrix(self):
        a, b = gen_zipf_product(6, 2.0, 9, seed=3)
        c = multiply_exact(a, b)
        assert np.array_equal(c.values, a.values)


class TestCli:
    def test_gen_approx_round_trip(self, tmp_path):
        prefix = str(tmp_path / "inst")
        assert run_cli(parse_args(
            ["gen", "--n", "16", "--z", "2.0", "--nnz", "40", "--seed", "5",
             "--output", prefix])) == 0
        report = str(tmp_path / "report.csv")
        code = run_cli(parse_args(
            ["approx", "--input", prefix, "--b", "32", "--k", "4",
             "--output", report]))
        assert code == 0
        lines = open(report).read().splitlines()
        assert lines[0] == "bound,measured,value,satisfied"
        assert all(line.endswith("true") for line in lines[1:])

    def test_approx_capacity_from_eps(self, tmp_path):
        prefix = str(tmp_path / "inst")
        run_cli(parse_args(["gen", "--n", "16", "--nnz", "40", "--seed", "5",
                            "--output", prefix]))
        out = str(tmp_path / "r.csv")
        # b omitted: derived as k + ceil(k/eps) = 4 + 16 = 20
        code = run_cli(parse_args(
            ["approx", "--input", prefix, "--k", "4", "--eps", "0.25",
             "--output", out]))
        assert code == 0
        assert "recovery_p2_k4" in open(out).read()

    def test_recover_round_trip(self, tmp_path):
        prefix = str(tmp_path / "inst")
        run_cli(parse_args(["gen", "--n", "16", "--nnz", "4", "--seed", "9",
                            "--output", prefix]))
        out = str(tmp_path / "rec.csv")
        assert run_cli(parse_args(
            ["recover", "--input", prefix, "--b", "4", "--output", out])) == 0
        lines = open(out).read().splitlines()
        assert lines[0] == "i,j,weight"
        assert len(lines) == 5

    def test_recover_oracle_mode_matches(self, tmp_path):
        prefix = str(tmp_path / "inst")
        run_cli(parse_args(["gen", "--n", "16", "--nnz", "4", "--seed", "9",
                            "--output", prefix]))
        out_a = str(tmp_path / "a.csv")
        out_b = str(tmp_path / "b.csv")
        assert run_cli(parse_args(
            ["recover", "--input", prefix, "--b", "4", "--output", out_a])) == 0
        assert run_cli(parse_args(
            ["recover", "--input", prefix, "--b", "4", "--oracle", "--parallel",
             "--output", out_b])) == 0
        assert open(out_a).read() == open(out_b).read()

    def test_recover_multi_pass(self, tmp_path):
        prefix = str(tmp_path / "inst")
        run_cli(parse_args(["gen", "--n", "16", "--nnz", "30", "--seed", "2",
                            "--output", prefix]))
        out = str(tmp_path / "rec.csv")
        assert run_cli(parse_args(
            ["recover", "--input", prefix, "--b", "4", "--k", "2", "--s", "2",
             "--z", "2.0", "--output", out])) == 0
        assert len(open(out).read().splitlines()) == 5

    def test_lift_pipeline(self, tmp_path):
        db = tmp_path / "txns.dat"
        db.write_text(TOY_DB)
        out = str(tmp_path / "summary.csv")
        assert run_cli(parse_args(
            ["lift", "--input", str(db), "--b", "4", "--output", out])) == 0
        assert open(out).read().startswith("i,j,estimate")

    def test_report_curve(self, tmp_path):
        prefix = str(tmp_path / "inst")
        run_cli(parse_args(["gen", "--n", "8", "--nnz", "20", "--seed", "1",
                            "--output", prefix]))
        out = str(tmp_path / "curve.csv")
        assert run_cli(parse_args(
            ["report", "--input", prefix, "--b-list", "2,4,8,16",
             "--output", out])) == 0
        lines = open(out).read().splitlines()
        assert lines[0] == "b,measured_error,bound_E1,bound_residual"
        assert len(lines) == 5

    def test_reports_are_byte_identical(self, tmp_path):
        prefix = str(tmp_path / "inst")
        run_cli(parse_args(["gen", "--n", "8", "--nnz", "20", "--seed", "1",
                            "--output", prefix]))
        outs = []
        for name in ("r1.csv", "r2.csv"):
            out = str(tmp_path / name)
            run_cli(parse_args(["approx", "--input", prefix, "--b", "8",
                                "--output", out]))
            outs.append(open(out).read())
        assert outs[0] == outs[1]

    def test_missing_input_is_data_error(self, tmp_path):
        code = run_cli(parse_args(
            ["approx", "--input", str(tmp_path / "nope"), "--b", "4"]))
        assert code == 2

    def test_bad_fimi_is_data_error(self, tmp_path):
        db = tmp_path / "bad.dat"
        db.write_text("0 oops\n")
        assert run_cli(parse_args(["lift", "--input", str(db), "--b", "4"])) == 2

    def test_unknown_subcommand_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            parse_args(["frobnicate"])
        assert exc.value.code == 1

    def test_missing_required_flag_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            parse_args(["approx", "--b", "4"])
        assert exc.value.code == 1

    def test_console_entry_point(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "skewprod.cli", "gen", "--n", "4",
             "--nnz", "4", "--output", str(tmp_path / "x")],
            capture_output=True,
        )
        assert proc.returncode == 0

    def test_main_exits_nonzero_on_usage(self):
        with pytest.raises(SystemExit) as exc:
            main(["nope"])
        assert exc.value.code == 1
