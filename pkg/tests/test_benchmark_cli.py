import csv
import os

import numpy as np
import pytest
from numpy.testing import assert_allclose

import hdrkit as hk
from hdrkit.benchmark import RunConfig, apply_measures, replicate_rng, run_bench, run_tune
from hdrkit.cli import main

FAST = dict(reps=8, seed=42, ref_size=10 ** 5)


def _bench_args(out, summary=None, workers=1, extra=()):
    args = [
        "bench", "--scenarios", "S2", "--n", "60", "--measures", "m0-kde,m1,m3-ecdf",
        "--reps", "8", "--seed", "42", "--ref-size", "100000", "--out", str(out),
        "--workers", str(workers),
    ]
    if summary:
        args += ["--summary", str(summary)]
    return args + list(extra)


class TestDeterminism:
    def test_rerun_byte_identical(self, tmp_path):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(_bench_args(out1)) == 0
        assert main(_bench_args(out2)) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_worker_count_independence(self, tmp_path):
        out1, out4 = tmp_path / "w1.csv", tmp_path / "w4.csv"
        assert main(_bench_args(out1, workers=1)) == 0
        assert main(_bench_args(out4, workers=4)) == 0
        assert out1.read_bytes() == out4.read_bytes()

    def test_replicate_streams_independent_of_measure_order(self):
        cfg_a = RunConfig(scenarios=("S2",), ns=(60,), measures=("m0-kde", "m1"), **FAST)
        cfg_b = RunConfig(scenarios=("S2",), ns=(60,), measures=("m1", "m0-kde"), **FAST)
        rec_a, _ = run_bench(cfg_a)
        rec_b, _ = run_bench(cfg_b)
        rows_a = {(r.measure, r.replicate): r.row for r in rec_a}
        rows_b = {(r.measure, r.replicate): r.row for r in rec_b}
        assert rows_a == rows_b

    def test_rng_streams_distinct(self):
        a = replicate_rng(1, "S2", 50, "m1", 0).random(4)
        b = replicate_rng(1, "S2", 50, "m1", 1).random(4)
        c = replicate_rng(1, "S2", 50, "m2", 0).random(4)
        assert not np.allclose(a, b)
        assert not np.allclose(a, c)


class TestBenchOutputs:
    def test_result_and_summary_schema(self, tmp_path):
        out, summary = tmp_path / "r.csv", tmp_path / "s.csv"
        assert main(_bench_args(out, summary=summary)) == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 8 * 3
        assert set(rows[0]) == {
            "scenario", "n", "measure", "replicate", "err", "fpr", "fnr",
            "accuracy", "f1", "mcc", "hyperparams_used", "fitted_copula_family",
        }
        assert all(r["hyperparams_used"] for r in rows)
        with open(summary) as fh:
            srows = list(csv.DictReader(fh))
        assert len(srows) == 3
        for r in srows:
            assert_allclose(float(r["err_mean"]) + 0.0, float(r["err_mean"]))

    def test_timing_column_opt_in(self, tmp_path):
        out = tmp_path / "t.csv"
        assert main(_bench_args(out, extra=["--timing"])) == 0
        with open(out) as fh:
            header = fh.readline().strip().split(",")
        assert header[-1] == "wall_time_ms"

    def test_unknown_scenario_usage_error(self, tmp_path):
        code = main(["bench", "--scenarios", "S99", "--n", "50", "--measures", "m1",
                     "--out", str(tmp_path / "x.csv")])
        assert code == 2

    def test_unknown_measure_usage_error(self, tmp_path):
        code = main(["bench", "--scenarios", "S2", "--n", "50", "--measures", "m9",
                     "--out", str(tmp_path / "x.csv")])
        assert code == 2


class TestTune:
    def test_single_value_equals_bench_aggregation(self):
        cfg = RunConfig(scenarios=("S2",), ns=(60,), measures=("m1",), k_override=7, **FAST)
        _, summary = run_bench(cfg)
        param, rows = run_tune("S2", 60, "m1", [7], **FAST)
        assert param == "k"
        cell = summary[("S2", 60, "m1")]
        for name, mean in rows[0][1].items():
            assert_allclose(mean, cell[name][0], rtol=1e-12)

    def test_empty_grid_errors(self):
        with pytest.raises(ValueError):
            run_tune("S2", 60, "m1", [], **FAST)

    def test_untunable_measure_errors(self):
        with pytest.raises(ValueError):
            run_tune("S2", 60, "m0-kde", [1, 2], **FAST)

    def test_cli_grid_syntax(self, tmp_path):
        out = tmp_path / "tune.csv"
        code = main(["tune", "--scenario", "S2", "--n", "60", "--measure", "m1",
                     "--grid", "4:6", "--reps", "5", "--ref-size", "100000",
                     "--workers", "1", "--out", str(out)])
        assert code == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert [r["value"] for r in rows] == ["4", "5", "6"]


class TestApply:
    def test_round_trip_simulate_apply(self, tmp_path):
        draws = tmp_path / "draws.csv"
        labeled = tmp_path / "labeled.csv"
        assert main(["simulate", "--scenario", "S2", "--n", "300", "--seed", "7",
                     "--out", str(draws)]) == 0
        assert main(["apply", "--input", str(draws), "--x", "x1", "--y", "x2",
                     "--measures", "m0-kde,m1,m3-ecdf", "--scale", "zscore",
                     "--out", str(labeled)]) == 0
        with open(draws) as fh:
            orig = [(r["x1"], r["x2"]) for r in csv.DictReader(fh)]
        with open(labeled) as fh:
            back = [(r["x1"], r["x2"]) for r in csv.DictReader(fh)]
        assert orig == back  # bit-exact round trip of the point set

    def test_simulate_s17_simplex(self, tmp_path):
        out = tmp_path / "s17.csv"
        assert main(["simulate", "--scenario", "S17", "--n", "100", "--seed", "3",
                     "--out", str(out)]) == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert all(float(r["x1"]) + float(r["x2"]) <= 1.0 for r in rows)

    def test_simulate_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for p in (a, b):
            main(["simulate", "--scenario", "S2", "--n", "50", "--seed", "11", "--out", str(p)])
        assert a.read_bytes() == b.read_bytes()

    def test_consensus_inside_fraction(self):
        rng = np.random.default_rng(1)
        pts = rng.normal(size=(800, 2))
        res = apply_measures(pts, ("m0-kde", "m1", "m2", "m3-ecdf", "m0-npcop", "m3-npcop"), alpha=0.05)
        frac = float(np.mean(res.consensus))
        assert abs(frac - 0.95) < 0.01

    def test_alpha_half_coverage(self):
        rng = np.random.default_rng(2)
        pts = rng.normal(size=(600, 2))
        res = apply_measures(pts, ("m0-kde",), alpha=0.5)
        assert abs(float(np.mean(res.labels["m0-kde"])) - 0.5) < 0.05

    def test_single_measure_consensus_identity(self):
        rng = np.random.default_rng(3)
        pts = rng.normal(size=(300, 2))
        res = apply_measures(pts, ("m1",), alpha=0.05)
        assert np.array_equal(res.consensus, res.labels["m1"])

    def test_unknown_column_lists_headers(self, tmp_path, capsys):
        f = tmp_path / "d.csv"
        f.write_text("a,b\n1,2\n")
        code = main(["apply", "--input", str(f), "--x", "zzz", "--y", "b",
                     "--measures", "m1", "--out", str(tmp_path / "o.csv")])
        assert code == 2
        assert "available: a, b" in capsys.readouterr().err

    def test_non_numeric_cell_reports_line(self, tmp_path, capsys):
        f = tmp_path / "d.csv"
        f.write_text("a,b\n1,2\n3,oops\n")
        code = main(["apply", "--input", str(f), "--x", "a", "--y", "b",
                     "--measures", "m1", "--out", str(tmp_path / "o.csv")])
        assert code == 2
        assert ":3:" in capsys.readouterr().err

    def test_missing_rows_dropped(self, tmp_path, caplog):
        f = tmp_path / "d.csv"
        rows = ["a,b"] + [f"{i * 0.1},{i * 0.2}" for i in range(40)] + ["5,", ",7"]
        f.write_text("\n".join(rows) + "\n")
        out = tmp_path / "o.csv"
        code = main(["apply", "--input", str(f), "--x", "a", "--y", "b",
                     "--measures", "m1", "--k", "3", "--scale", "none", "--out", str(out)])
        assert code == 0
        with open(out) as fh:
            assert len(list(csv.DictReader(fh))) == 40

    def test_svg_output(self, tmp_path):
        draws = tmp_path / "d.csv"
        svg = tmp_path / "hdr.svg"
        main(["simulate", "--scenario", "S2", "--n", "200", "--seed", "5", "--out", str(draws)])
        code = main(["apply", "--input", str(draws), "--x", "x1", "--y", "x2",
                     "--measures", "m0-kde,m1,m3-ecdf", "--out", str(tmp_path / "o.csv"),
                     "--svg", str(svg)])
        assert code == 0
        text = svg.read_text()
        assert text.startswith("<svg")
        assert 'viewBox="0 0 600 600"' in text
        assert text.count("<circle") == 200
        assert 'class="in"' in text and 'class="out"' in text


class TestEnvWorkers:
    def test_hdr_workers_env_default(self, tmp_path, monkeypatch):
        monkeypatch.setenv("HDR_WORKERS", "2")
        out = tmp_path / "env.csv"
        args = ["bench", "--scenarios", "S2", "--n", "60", "--measures", "m1",
                "--reps", "4", "--seed", "42", "--ref-size", "100000", "--out", str(out)]
        assert main(args) == 0
        assert out.exists()
