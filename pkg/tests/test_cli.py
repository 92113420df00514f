"""CLI behavior: schemas, determinism, exit codes, round-trips."""

import json
import math

import pytest

from spinfront.cli import load_scan_summary, main
from spinfront.analysis import detect_switch


def read_lines(path):
    return path.read_text().splitlines()


def columns_of(path):
    for line in read_lines(path):
        if line.startswith("# columns: "):
            return line.removeprefix("# columns: ").split(",")
    raise AssertionError(f"no columns header in {path}")


def data_rows(path):
    return [ln for ln in read_lines(path) if not ln.startswith("#")]


class TestEvolve:
    def test_default_schema_and_grid(self, tmp_path):
        out = tmp_path / "traj"
        rc = main(["evolve", "--model", "ising-rwa", "-N", "6",
                   "--t-max", "4", "--dt", "0.05",
                   "--output", str(out)])
        assert rc == 0
        csv = out.with_suffix(".csv")
        assert columns_of(csv) == ["time", "cf_zz", "cf_xx", "mi", "cc",
                                   "qd", "eof"]
        rows = data_rows(csv)
        assert len(rows) == math.floor(4 / 0.05) + 1
        first = rows[0].split(",")
        assert float(first[0]) == 0.0

    def test_measure_subset(self, tmp_path):
        out = tmp_path / "traj"
        rc = main(["evolve", "-N", "4", "--t-max", "2", "--dt", "0.1",
                   "--measures", "mi,eof,cfzz", "--output", str(out)])
        assert rc == 0
        assert columns_of(out.with_suffix(".csv")) == ["time", "mi", "eof",
                                                       "cf_zz"]

    def test_json_format(self, tmp_path):
        out = tmp_path / "traj"
        rc = main(["evolve", "-N", "4", "--t-max", "1", "--dt", "0.1",
                   "--measures", "mi", "--format", "json",
                   "--output", str(out)])
        assert rc == 0
        payload = json.loads(out.with_suffix(".json").read_text())
        assert payload["version"]
        assert payload["columns"] == ["time", "mi"]
        assert len(payload["rows"]) == 11

    def test_repeat_runs_identical(self, tmp_path):
        args = ["evolve", "-N", "8", "--t-max", "6", "--dt", "0.02",
                "--output", str(tmp_path / "a")]
        assert main(args) == 0
        first = (tmp_path / "a.csv").read_bytes()
        assert main(args) == 0
        assert (tmp_path / "a.csv").read_bytes() == first

    def test_requires_t_max(self, tmp_path):
        rc = main(["evolve", "-N", "4", "--output", str(tmp_path / "x")])
        assert rc == 2


class TestScan:
    def test_files_and_summary(self, tmp_path):
        stem = tmp_path / "scan"
        rc = main(["scan", "--measure", "mi", "--delta", "1e-4,1e-5",
                   "--n", "4:40:4", "--output", str(stem)])
        assert rc == 0
        for tag in ("0.0001", "1em05"):
            csv = tmp_path / f"scan_delta{tag}.csv"
            assert csv.exists(), csv
            assert columns_of(csv) == ["n_sites", "startup_time"]
            assert len(data_rows(csv)) == 10
        summary = json.loads((tmp_path / "scan_summary.json").read_text())
        assert set(summary["scans"]) == {"0.0001", "1.0000000000000001e-05"}

    def test_round_trip_reproduces_fits(self, tmp_path):
        stem = tmp_path / "scan"
        rc = main(["scan", "--measure", "mi", "--delta", "1e-4",
                   "--n", "4:60:4", "--output", str(stem)])
        assert rc == 0
        scans = load_scan_summary(tmp_path / "scan_summary.json")
        scan = scans[1e-4]
        refit = detect_switch(scan)
        assert refit.switch_index == scan.switch_index
        assert refit.segment_fits == scan.segment_fits

    def test_missing_lengths_warn(self, tmp_path, capsys):
        stem = tmp_path / "scan"
        rc = main(["scan", "--measure", "cfxx", "--delta", "1e-6",
                   "--n", "4:12:2", "--t-max", "30",
                   "--output", str(stem)])
        assert rc == 4
        err = capsys.readouterr().err
        assert "never reached" in err

    def test_determinism_with_workers(self, tmp_path):
        args = ["scan", "--measure", "mi", "--delta", "1e-5",
                "--n", "4:60:8", "--workers", "4",
                "--output", str(tmp_path / "a")]
        assert main(args) == 0
        summary = (tmp_path / "a_summary.json").read_bytes()
        csv = (tmp_path / "a_delta1em05.csv").read_bytes()
        assert main(args) == 0
        assert (tmp_path / "a_summary.json").read_bytes() == summary
        assert (tmp_path / "a_delta1em05.csv").read_bytes() == csv

    def test_bad_measure_is_config_error(self, tmp_path):
        rc = main(["scan", "--measure", "bogus", "--delta", "1e-4",
                   "--output", str(tmp_path / "s")])
        assert rc == 2

    def test_bad_delta_is_config_error(self, tmp_path):
        rc = main(["scan", "--measure", "mi", "--delta", "abc",
                   "--output", str(tmp_path / "s")])
        assert rc == 2


class TestPeaks:
    def test_peaks_and_fits(self, tmp_path):
        stem = tmp_path / "pk"
        rc = main(["peaks", "--measure", "mi", "--n", "20:70:10",
                   "--output", str(stem)])
        assert rc == 0
        csv = tmp_path / "pk_peaks.csv"
        assert columns_of(csv) == ["n_sites", "peak1_time", "peak1_value",
                                   "peak2_time", "peak2_value"]
        assert len(data_rows(csv)) == 6
        fits = json.loads((tmp_path / "pk_fits.json").read_text())["fits"]
        assert set(fits) == {"first", "second"}
        assert fits["first"]["alpha"] < -2.0
        assert fits["first"]["r_squared"] > 0.97

    def test_determinism(self, tmp_path):
        args = ["peaks", "--measure", "mi", "--n", "20:60:10",
                "--output", str(tmp_path / "a")]
        assert main(args) == 0
        fits = (tmp_path / "a_fits.json").read_bytes()
        csv = (tmp_path / "a_peaks.csv").read_bytes()
        assert main(args) == 0
        assert (tmp_path / "a_fits.json").read_bytes() == fits
        assert (tmp_path / "a_peaks.csv").read_bytes() == csv


class TestValidateRwa:
    def test_table_shape(self, tmp_path):
        out = tmp_path / "rwa"
        rc = main(["validate-rwa", "-N", "3", "--ratios", "0.5:20:5",
                   "--output", str(out)])
        assert rc == 0
        csv = out.with_suffix(".csv")
        cols = columns_of(csv)
        assert cols[0] == "ratio"
        assert "overlap_ground" in cols and "overlap_second" in cols
        rows = data_rows(csv)
        assert len(rows) == 5
        for row in rows:
            cells = [float(x) for x in row.split(",")]
            for ov in cells[-3:]:
                assert 0.0 <= ov <= 1.0 + 1e-12

    def test_requires_ratios(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["validate-rwa", "-N", "3",
                  "--output", str(tmp_path / "x")])
        assert exc.value.code == 2


class TestHeisenberg:
    def test_preset_scan(self, tmp_path):
        stem = tmp_path / "heis"
        rc = main(["heisenberg", "--n", "4:24:4", "--delta", "1e-6",
                   "--output", str(stem)])
        assert rc == 0
        summary = json.loads((tmp_path / "heis_summary.json").read_text())
        scan = next(iter(summary["scans"].values()))
        assert scan["model"] == "heisenberg"
        assert scan["measure"] == "cfzz"
        times = [t for _, t in scan["entries"]]
        assert times == sorted(times)


class TestConfigErrors:
    def test_too_small_chain(self, tmp_path):
        rc = main(["evolve", "-N", "1", "--t-max", "2",
                   "--output", str(tmp_path / "x")])
        assert rc == 2

    def test_bad_range_order(self, tmp_path):
        rc = main(["scan", "--measure", "mi", "--delta", "1e-4",
                   "--n", "50:10", "--output", str(tmp_path / "x")])
        assert rc == 2

    def test_negative_dt(self, tmp_path):
        rc = main(["evolve", "-N", "4", "--t-max", "2", "--dt", "-0.1",
                   "--output", str(tmp_path / "x")])
        assert rc == 2
