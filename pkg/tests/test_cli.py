import csv
import io
import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from app.cli import app
from app.snail import SnailParams, kerr_free_flux

runner = CliRunner()


def invoke(*args):
    return runner.invoke(app, [str(arg) for arg in args])


def read_csv(path: Path):
    rows = list(csv.reader(io.StringIO(path.read_text(encoding="utf-8"))))
    return rows[0], [[float(value) for value in row] for row in rows[1:]]


def json_lines(output: str):
    return [json.loads(line) for line in output.splitlines() if line.startswith("{")]


class TestCharacterize:
    def test_cubic_term_vanishes_at_sweet_spots(self, reference_spec_path, tmp_path):
        out = tmp_path / "char.csv"
        result = invoke(
            "characterize", "--spec", reference_spec_path, "--grid", 3, "--flux-max", 0.5, "--out", out
        )
        assert result.exit_code == 0, result.output

        header, rows = read_csv(out)
        assert header == [
            "flux_fraction",
            "phi_min_rad",
            "c2",
            "c3",
            "c4",
            "g3_Hz",
            "g4_Hz",
            "L_s_pH",
            "f0_GHz",
        ]
        assert [row[0] for row in rows] == [0.0, 0.25, 0.5]
        assert abs(rows[0][3]) < 1e-12
        assert abs(rows[2][3]) < 1e-12
        assert abs(rows[1][3]) > 1e-3

    def test_empty_grid(self, reference_spec_path):
        result = invoke("characterize", "--spec", reference_spec_path, "--grid", 0)
        assert result.exit_code == 2
        assert "empty grid" in result.output

    def test_deterministic(self, reference_spec_path, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (first, second):
            result = invoke("characterize", "--spec", reference_spec_path, "--grid", 11, "--out", out)
            assert result.exit_code == 0, result.output
        assert first.read_bytes() == second.read_bytes()

    def test_svg(self, reference_spec_path, tmp_path):
        svg = tmp_path / "g3.svg"
        result = invoke(
            "characterize", "--spec", reference_spec_path, "--grid", 5, "--out", tmp_path / "c.csv",
            "--svg", svg,
        )
        assert result.exit_code == 0, result.output
        assert svg.read_text(encoding="utf-8").lstrip().startswith("<?xml")

    def test_invalid_spec(self, write_spec, reference_spec_path):
        text = reference_spec_path.read_text(encoding="utf-8").replace("n_large: 3", "n_large: 3\n  beta: 1")
        result = invoke("characterize", "--spec", write_spec(text), "--grid", 3)
        assert result.exit_code == 2
        assert "SpecValidationError" in result.output
        assert "snail.beta" in result.output

    def test_positional_numbers(self, reference_spec_path, tmp_path):
        out = tmp_path / "char.csv"
        result = invoke("characterize", "--spec", reference_spec_path, "--grid", 3, "--out", out)
        assert result.exit_code == 0, result.output
        lines = out.read_text(encoding="utf-8").splitlines()[1:]
        fields = [field for line in lines for field in line.split(",")]
        assert not any("e" in field for field in fields)

    def test_alpha_override(self, reference_spec_path, tmp_path):
        out = tmp_path / "char.csv"
        result = invoke(
            "characterize", "--spec", reference_spec_path, "--grid", 3, "--alpha", 0.29, "--out", out
        )
        assert result.exit_code == 0, result.output
        _, rows = read_csv(out)
        assert rows[0][2] == pytest.approx(0.29 + 1 / 3, rel=1e-9)

    def test_kerr_free_next_to_csv_file(self, reference_spec_path, reference_cell, tmp_path):
        result = invoke(
            "characterize", "--spec", reference_spec_path, "--grid", 3, "--kerr-free",
            "--out", tmp_path / "char.csv",
        )
        assert result.exit_code == 0, result.output
        summary = json.loads(result.stdout)
        assert summary["alpha"] == 0.18
        assert summary["kerr_free_flux"] == pytest.approx(kerr_free_flux(reference_cell), abs=1e-9)

    def test_kerr_free_with_csv_on_stdout(self, reference_spec_path, reference_cell):
        result = invoke(
            "characterize", "--spec", reference_spec_path, "--grid", 3, "--alpha", 0.29, "--kerr-free"
        )
        assert result.exit_code == 0, result.output

        summaries = json_lines(result.output)
        assert len(summaries) == 1
        cell = SnailParams(alpha=0.29, n_large=3, l_josephson=reference_cell.l_josephson)
        assert summaries[0]["alpha"] == 0.29
        assert summaries[0]["kerr_free_flux"] == pytest.approx(kerr_free_flux(cell), abs=1e-9)
        assert summaries[0]["kerr_free_flux"] != pytest.approx(kerr_free_flux(reference_cell), abs=1e-4)

    def test_unwritable_svg(self, reference_spec_path, tmp_path):
        result = invoke(
            "characterize", "--spec", reference_spec_path, "--grid", 3,
            "--out", tmp_path / "char.csv", "--svg", tmp_path,
        )
        assert result.exit_code == 2
        assert "OutputWriteError" in result.output


class TestDesign:
    def test_operating_point(self, reference_spec_path, tmp_path):
        out = tmp_path / "design.json"
        result = invoke("design", "--spec", reference_spec_path, "--target-ghz", 6.4, "--out", out)
        assert result.exit_code == 0, result.output

        summary = json.loads(out.read_text(encoding="utf-8"))
        assert list(summary) == sorted(summary)
        assert 0 < summary["operating_flux"] < 0.5
        assert summary["z_jpa_ohm"] == pytest.approx(828.9, abs=0.1)
        assert summary["z_jpa_ohm"] == pytest.approx(2 * summary["x_ohm"] / 3.141592653589793)
        assert summary["z_quarter_ohm"] == pytest.approx(87.0, rel=0.15)
        assert summary["z_half_ohm"] == pytest.approx(59.0, rel=0.15)
        assert summary["l_array_H"] == pytest.approx(summary["l_array_nH"] * 1e-9)
        assert summary["center_frequency_Hz"] == pytest.approx(6.4e9)

    def test_out_of_range_target(self, reference_spec_path):
        result = invoke("design", "--spec", reference_spec_path, "--target-ghz", 20)
        assert result.exit_code == 1
        assert "OutOfTunableRange" in result.output

    def test_invalid_order(self, reference_spec_path):
        result = invoke("design", "--spec", reference_spec_path, "--order", 0)
        assert result.exit_code == 2
        assert "InvalidOrder" in result.output


class TestGain:
    def test_pump_off(self, reference_spec_path, tmp_path):
        out = tmp_path / "gain.csv"
        result = invoke("gain", "--spec", reference_spec_path, "--gain-db", 0, "--grid", 201, "--out", out)
        assert result.exit_code == 0, result.output

        header, rows = read_csv(out)
        assert header == ["frequency_GHz", "gain_dB", "re_gamma", "im_gamma"]
        assert len(rows) == 201
        assert all(abs(row[1]) < 1e-6 for row in rows)

    def test_calibrated_summary(self, reference_spec_path, tmp_path):
        summary_path = tmp_path / "summary.json"
        result = invoke(
            "gain", "--spec", reference_spec_path, "--gain-db", 20, "--threshold-db", 17,
            "--out", tmp_path / "gain.csv", "--summary", summary_path,
        )
        assert result.exit_code == 0, result.output

        summary = json.loads(summary_path.read_text(encoding="utf-8"))
        assert summary["peak_gain_dB"] == pytest.approx(20.0, abs=0.01)
        assert summary["bandwidth_MHz"] > 0
        assert summary["r_p_ohm"] > 0
        assert summary["threshold_dB"] == 17.0

    def test_summary_follows_csv_file(self, reference_spec_path, tmp_path):
        result = invoke(
            "gain", "--spec", reference_spec_path, "--r-p", 100, "--grid", 101,
            "--out", tmp_path / "gain.csv",
        )
        assert result.exit_code == 0, result.output
        assert json.loads(result.stdout)["r_p_ohm"] == 100.0

    def test_summary_on_stderr_when_csv_on_stdout(self, reference_spec_path):
        result = invoke("gain", "--spec", reference_spec_path, "--grid", 51)
        assert result.exit_code == 0, result.output

        summaries = json_lines(result.output)
        assert len(summaries) == 1
        assert summaries[0]["peak_gain_dB"] == pytest.approx(20.0, abs=0.01)
        assert summaries[0]["r_p_ohm"] > 0
        assert {"peak_frequency_GHz", "bandwidth_MHz", "threshold_dB"} <= set(summaries[0])

        csv_lines = [line for line in result.output.splitlines() if not line.startswith("{")]
        assert csv_lines[0] == "frequency_GHz,gain_dB,re_gamma,im_gamma"
        assert len(csv_lines) == 52

    def test_unreachable_gain(self, reference_spec_path):
        result = invoke("gain", "--spec", reference_spec_path, "--gain-db", 200)
        assert result.exit_code == 1
        assert "Unstable" in result.output
        assert "critical r_p" in result.output

    def test_gain_and_pump_are_exclusive(self, reference_spec_path):
        result = invoke("gain", "--spec", reference_spec_path, "--gain-db", 20, "--r-p", 100)
        assert result.exit_code == 2


class TestTune:
    def test_golden_zero_flux(self, reference_spec_path, tmp_path, fixtures_dir):
        out = tmp_path / "tune.csv"
        result = invoke(
            "tune", "--spec", reference_spec_path, "--grid", 1, "--flux-min", 0, "--no-coil", "--out", out
        )
        assert result.exit_code == 0, result.output
        assert out.read_bytes() == (fixtures_dir / "tune_zero_flux.csv").read_bytes()

    def test_monotone_with_coil_column(self, reference_spec_path, tmp_path):
        out = tmp_path / "tune.csv"
        result = invoke("tune", "--spec", reference_spec_path, "--grid", 101, "--out", out)
        assert result.exit_code == 0, result.output

        header, rows = read_csv(out)
        assert header == ["flux_fraction", "coil_current_mA", "f0_GHz"]
        assert len(rows) == 101
        assert rows[-1][1] == pytest.approx(4.0)
        frequencies = [row[2] for row in rows]
        assert all(b <= a for a, b in zip(frequencies, frequencies[1:]))

    def test_coincident_calibration_currents(self, reference_spec_path, write_spec):
        text = reference_spec_path.read_text(encoding="utf-8").replace("current_mA: 4", "current_mA: 0")
        result = invoke("tune", "--spec", write_spec(text), "--grid", 3)
        assert result.exit_code == 2
        assert "DegenerateCalibration" in result.output

    def test_flux_outside_period(self, reference_spec_path):
        result = invoke(
            "tune", "--spec", reference_spec_path, "--grid", 5, "--flux-min", -0.6, "--flux-max", 0.2
        )
        assert result.exit_code == 2
        assert "outside (-0.5, 0.5]" in result.output

    def test_unwritable_output(self, reference_spec_path, tmp_path):
        result = invoke("tune", "--spec", reference_spec_path, "--grid", 3, "--out", tmp_path)
        assert result.exit_code == 2
        assert result.output.startswith("error: OutputWriteError: cannot write")
        assert len(result.output.strip().splitlines()) == 1


class TestSaturation:
    def test_golden(self, tmp_path, fixtures_dir):
        out = tmp_path / "sat.json"
        result = invoke("saturation", "--ic-ratio", 2, "--q-ratio", 1, "--out", out)
        assert result.exit_code == 0, result.output
        assert out.read_bytes() == (fixtures_dir / "saturation_2_1.json").read_bytes()

    def test_quality_factor_law(self):
        result = invoke("saturation", "--ic-ratio", 1, "--q-ratio", 2)
        assert result.exit_code == 0, result.output
        summary = json.loads(result.stdout)
        assert summary["power_ratio"] == 0.125
        assert summary["power_ratio_db"] == pytest.approx(-9.03, abs=0.005)

    def test_non_positive_ratio(self):
        result = invoke("saturation", "--ic-ratio", 0, "--q-ratio", 1)
        assert result.exit_code == 2
        assert "InputError" in result.output
