"""Command-line interface: subcommands, report formats, and exit codes."""

import json

import numpy as np
import pytest

from sellkit import (chunk_occupancy, coo_to_crs, crs_to_sell,
                     gen_worst_case, read_matrix_market, write_matrix_market)
from sellkit.cli import main
from sellkit.formats import COOMatrix


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    assert code == 0, err
    return json.loads(out)


WORST = "gen:worst_case:n_chunks=8,C=4"
BANDED = "gen:banded:n=300,half_bw=5"


class TestAnalyze:
    def test_reports_stats_and_occupancy(self, capsys):
        doc = run_json(capsys, "analyze", WORST, "-C", "4",
                       "--sigmas", "1,16")
        assert doc["report_version"] == 1
        rows = doc["rows"]
        assert len(rows) == 2
        n = 32
        assert rows[0]["n_rows"] == n
        assert rows[0]["beta"] == pytest.approx((n + 4 - 1) / (4 * n), abs=0)
        assert rows[1]["sigma"] == 16
        assert rows[1]["beta"] == 1.0

    def test_table_format(self, capsys):
        code, out, _ = run(capsys, "analyze", WORST, "-C", "4")
        assert code == 0
        assert "beta" in out and "zeta" in out

    def test_csv_versioned_header(self, capsys):
        code, out, _ = run(capsys, "analyze", WORST, "-C", "4",
                           "--format", "csv")
        assert code == 0
        first, header = out.splitlines()[:2]
        assert first.startswith("# sellkit report v1")
        assert "beta" in header.split(",")

    def test_preset_chunk_height(self, capsys):
        doc = run_json(capsys, "analyze", BANDED, "--preset", "avx")
        assert doc["rows"][0]["C"] == 4

    def test_explicit_chunk_overrides_preset(self, capsys):
        doc = run_json(capsys, "analyze", BANDED, "--preset", "avx",
                       "-C", "16")
        assert doc["rows"][0]["C"] == 16

    def test_mtx_file_input(self, capsys, tmp_path, rng):
        rows = np.array([0, 1], np.int64)
        cols = np.array([1, 0], np.int64)
        m = COOMatrix(2, 2, rows, cols, np.array([3.0, 4.0]))
        p = str(tmp_path / "t.mtx")
        write_matrix_market(m, p)
        doc = run_json(capsys, "analyze", p, "-C", "2")
        assert doc["rows"][0]["n_nz"] == 2


class TestConvert:
    def test_cache_round_trip_preserves_occupancy(self, capsys, tmp_path):
        cache = str(tmp_path / "m.sell")
        doc = run_json(capsys, "convert", WORST, "-C", "4", "--sigma", "16",
                       "-o", cache)
        beta_written = doc["rows"][0]["beta"]
        doc2 = run_json(capsys, "analyze", cache)
        assert doc2["rows"][0]["beta"] == beta_written
        assert doc2["rows"][0]["sigma"] == 16

    def test_padding_overhead_counted(self, capsys, tmp_path):
        cache = str(tmp_path / "m.sell")
        doc = run_json(capsys, "convert", WORST, "-C", "4", "--sigma", "1",
                       "-o", cache)
        m = coo_to_crs(gen_worst_case(8, 4))
        s = crs_to_sell(m, 4, 1)
        assert doc["rows"][0]["padding_bytes"] == 12 * (s.stored_slots - s.nnz)
        assert doc["rows"][0]["build_s"] >= 0

    def test_crs_equivalent_note(self, capsys, tmp_path):
        cache = str(tmp_path / "m.sell")
        doc = run_json(capsys, "convert", BANDED, "-C", "1", "--sigma", "1",
                       "-o", cache)
        assert doc["rows"][0]["note"] == "CRS-equivalent"

    def test_bad_sigma_is_parameter_error(self, capsys, tmp_path):
        code, _, err = run(capsys, "convert", BANDED, "-C", "4", "--sigma",
                           "6", "-o", str(tmp_path / "x.sell"))
        assert code == 1
        assert "error:" in err


class TestBench:
    def test_kernel_report(self, capsys):
        doc = run_json(capsys, "bench", BANDED, "--kernel", "sell", "-C", "8",
                       "--sigma", "8", "--reps", "2", "--trials", "2",
                       "--threads", "1", "--sched", "static")
        row = doc["rows"][0]
        assert row["kernel"] == "sell"
        assert row["best_GF/s"] > 0
        assert row["median_GF/s"] > 0
        assert row["scheduling"] == "static"
        assert row["backend"] in ("python", "compiled")

    def test_crs_and_unrolled_agree_on_checksum(self, capsys):
        a = run_json(capsys, "bench", BANDED, "--kernel", "crs", "--reps",
                     "1", "--trials", "1", "--threads", "1")
        b = run_json(capsys, "bench", BANDED, "--kernel", "crs-unrolled",
                     "--reps", "1", "--trials", "1", "--threads", "1")
        assert a["rows"][0]["checksum"] == pytest.approx(
            b["rows"][0]["checksum"], rel=1e-10)

    def test_bandwidth_bound(self, capsys):
        doc = run_json(capsys, "bench", WORST, "--kernel", "sell", "-C", "4",
                       "--sigma", "16", "--reps", "1", "--trials", "1",
                       "--threads", "1", "--bandwidth", "43")
        row = doc["rows"][0]
        assert row["beta"] == 1.0
        assert row["bound_GF/s"] == pytest.approx(43 / 6)
        assert row["fraction_of_bound"] == pytest.approx(
            row["best_GF/s"] / (43 / 6))

    def test_auto_scheduling_resolves(self, capsys):
        doc = run_json(capsys, "bench", BANDED, "--reps", "1", "--trials",
                       "1", "--threads", "1", "--sched", "auto")
        assert doc["rows"][0]["scheduling"] in ("static", "guided1")

    def test_threads_env(self, capsys, monkeypatch):
        monkeypatch.setenv("SELLKIT_THREADS", "3")
        doc = run_json(capsys, "bench", BANDED, "--reps", "1", "--trials",
                       "1")
        assert doc["rows"][0]["threads"] == 3

    def test_threads_env_invalid(self, capsys, monkeypatch):
        monkeypatch.setenv("SELLKIT_THREADS", "zero")
        code, _, err = run(capsys, "bench", BANDED, "--reps", "1")
        assert code == 1
        assert "error:" in err


class TestSweep:
    def test_occupancy_never_decreases(self, capsys):
        doc = run_json(capsys, "sweep-sigma", "gen:skewed:n=256,base_len=3,"
                       "spike_len=60,spike_count=5", "-C", "8", "--no-bench",
                       "--cache-bytes", "4096")
        rows = doc["rows"]
        assert len(rows) >= 3
        assert rows[0]["sigma"] == 1
        betas = [r["beta"] for r in rows]
        assert all(a <= b + 1e-15 for a, b in zip(betas, betas[1:]))
        for r in rows:
            assert r["alpha_in_range"]

    def test_bench_columns_present_by_default(self, capsys):
        doc = run_json(capsys, "sweep-sigma", "gen:banded:n=100,half_bw=2",
                       "-C", "4", "--sigma-max", "16", "--reps", "1",
                       "--trials", "1", "--threads", "1")
        assert all("best_GF/s" in r for r in doc["rows"])

    def test_bad_range_rejected(self, capsys):
        code, _, err = run(capsys, "sweep-sigma", BANDED, "--sigma-min", "9",
                           "--sigma-max", "3")
        assert code == 1


class TestModel:
    def test_explicit_parameters(self, capsys):
        doc = run_json(capsys, "model", "--alpha", "0.068965517241",
                       "--beta", "1.0", "--nnzr", "14.5", "--nnzc", "14.5",
                       "--bandwidth", "43")
        row = doc["rows"][0]
        assert row["balance_bytes/flop"] == pytest.approx(6 + 12 / 14.5)
        assert row["predicted_GF/s"] == pytest.approx(43 / (6 + 12 / 14.5))
        assert row["bound_GF/s"] == pytest.approx(43 / 6)

    def test_matrix_derived(self, capsys):
        doc = run_json(capsys, "model", "--matrix", WORST, "-C", "4",
                       "--sigma", "16", "--alpha", "ideal", "--bandwidth",
                       "10")
        row = doc["rows"][0]
        assert row["beta"] == 1.0
        assert row["alpha"] == pytest.approx(1 / row["n_nzc"])

    def test_simulated_alpha(self, capsys):
        doc = run_json(capsys, "model", "--matrix", BANDED, "-C", "8",
                       "--alpha", "simulate", "--cache-bytes", "65536",
                       "--bandwidth", "10")
        row = doc["rows"][0]
        assert 0.0 <= row["alpha"] <= 8.0

    def test_non_square_carries_caveat(self, capsys, tmp_path):
        rows = np.array([0, 1, 2], np.int64)
        cols = np.array([0, 3, 4], np.int64)
        m = COOMatrix(3, 5, rows, cols, np.ones(3))
        p = str(tmp_path / "r.mtx")
        write_matrix_market(m, p)
        doc = run_json(capsys, "model", "--matrix", p, "-C", "2", "--alpha",
                       "ideal", "--bandwidth", "10")
        assert "square" in doc["rows"][0]["caveat"]

    def test_missing_parameters_rejected(self, capsys):
        code, _, err = run(capsys, "model", "--alpha", "0.1", "--bandwidth",
                           "10")
        assert code == 1
        assert "error:" in err

    def test_alpha_garbage_rejected(self, capsys):
        code, _, err = run(capsys, "model", "--alpha", "fast", "--beta", "1",
                           "--nnzr", "5", "--nnzc", "5", "--bandwidth", "10")
        assert code == 1


class TestMicrobench:
    @pytest.mark.parametrize("kind", ["read", "copy"])
    def test_runs_and_reports(self, capsys, kind):
        doc = run_json(capsys, "microbench", kind, "--size-mb", "1",
                       "--reps", "1", "--threads", "1")
        row = doc["rows"][0]
        assert row["bandwidth_GB/s"] > 0
        assert row["n_elems"] == (1 << 20) // 8
        if kind == "copy":
            assert row["bandwidth_GB/s"] == pytest.approx(
                1.5 * row["bandwidth_raw_GB/s"])


class TestGenerate:
    def test_writes_matrix_market(self, capsys, tmp_path):
        p = str(tmp_path / "w.mtx")
        doc = run_json(capsys, "generate", WORST, "-o", p)
        assert doc["rows"][0]["n_nz"] == coo_to_crs(gen_worst_case(8, 4)).nnz
        back = read_matrix_market(p)
        assert back.shape == (32, 32)

    def test_unknown_generator(self, capsys, tmp_path):
        code, _, err = run(capsys, "generate", "gen:fractal:n=4", "-o",
                           str(tmp_path / "x.mtx"))
        assert code == 1
        assert "unknown generator" in err

    def test_bad_generator_argument(self, capsys, tmp_path):
        code, _, err = run(capsys, "generate", "gen:dense:m=4", "-o",
                           str(tmp_path / "x.mtx"))
        assert code == 1


class TestPlumbing:
    def test_out_file(self, capsys, tmp_path):
        p = tmp_path / "report.json"
        code, out, _ = run(capsys, "analyze", WORST, "-C", "4", "--format",
                           "json", "--out", str(p))
        assert code == 0
        assert out == ""
        assert json.loads(p.read_text())["command"] == "analyze"

    def test_missing_file_is_clean_error(self, capsys):
        code, _, err = run(capsys, "analyze", "/nonexistent/m.mtx")
        assert code == 1
        assert "error:" in err

    def test_usage_error_exits_two(self, capsys):
        with pytest.raises(SystemExit) as e:
            main(["bench", BANDED, "--kernel", "warp"])
        assert e.value.code == 2

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as e:
            main(["--version"])
        assert e.value.code == 0

    def test_json_carries_everything_table_shows(self, capsys):
        doc = run_json(capsys, "analyze", WORST, "-C", "4")
        _, table, _ = run(capsys, "analyze", WORST, "-C", "4")
        header = table.splitlines()[2].split()
        for key in doc["rows"][0]:
            assert key in header
