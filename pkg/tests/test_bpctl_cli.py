import csv
import json
from dataclasses import replace
from pathlib import Path

import pytest
from jsonschema import Draft202012Validator

from biphoton.core.config import DEFAULTS, GridSettings, RunConfig, parse_config
from bpctl import cli

pytestmark = pytest.mark.integration

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _load_valid(path: Path) -> dict:
    """Read an emitted JSON file and check it against configs/<artifact>.schema.json."""
    document = json.loads(path.read_text(encoding="utf-8"))
    schema = json.loads((CONFIGS / f"{document['artifact']}.schema.json").read_text(encoding="utf-8"))
    Draft202012Validator.check_schema(schema)
    Draft202012Validator(schema).validate(document)
    return document


def _read_csv(path: Path) -> list:
    with path.open(newline="") as handle:
        return list(csv.reader(handle))


@pytest.fixture
def small_config_file(tmp_path: Path) -> Path:
    path = tmp_path / "small.json"
    path.write_text(json.dumps({"grid": {"points_per_axis": 256}, "shg": {"points": 11}}))
    return path


def _run(*argv: str) -> int:
    return cli.main(list(argv))


def test_print_defaults(capsys):
    assert _run("--print-defaults") == 0
    assert json.loads(capsys.readouterr().out) == DEFAULTS


def test_seedless_is_rejected(tmp_path):
    assert _run("report", "--seedless", "--out", str(tmp_path)) == 1
    assert not (tmp_path / "report.json").exists()


@pytest.mark.parametrize("argv", [[], ["fly"], ["report", "--frobnicate"]])
def test_usage_errors(argv):
    assert _run(*argv) == 1


def test_configuration_errors_exit_1(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"grid": {"pionts": 512}}')
    assert _run("jsa", "--config", str(bad), "--out", str(tmp_path)) == 1
    assert _run("jsa", "--config", str(tmp_path / "missing.json")) == 1


def test_unmatchable_crystal_exits_2(tmp_path):
    path = tmp_path / "period.json"
    path.write_text(json.dumps({"crystal": {"poling_period_um": 10.0}, "grid": {"points_per_axis": 256}}))
    assert _run("jsa", "--config", str(path), "--out", str(tmp_path / "out")) == 2


def test_report_is_deterministic(small_config_file, tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    assert _run("report", "--config", str(small_config_file), "--out", str(first)) == 0
    assert _run("report", "--config", str(small_config_file), "--out", str(second)) == 0
    raw = (first / "report.json").read_bytes()
    assert raw == (second / "report.json").read_bytes()
    assert b"\r\n" not in raw

    report = _load_valid(first / "report.json")
    assert report["qpm_sign"] == 1
    assert report["phase_matching_mode"] == "exact"
    assert report["phase_matching"]["shg"]["qpm_sign"] == -1
    assert report["shg"]["calibration"]["source"] == "calibrated"
    assert report["shg"]["reference_point"]["p2_w"] == pytest.approx(0.742, abs=1e-6)
    assert report["instrument"]["rbw_source"] == "fitted"
    assert report["experimental"]["hom_visibility"] == 0.95


def test_report_keeps_figures_when_rbw_cannot_be_fitted(tmp_path):
    # a 4 mm crystal already gives a marginal wider than the measured 3.22 nm
    path = tmp_path / "short.json"
    path.write_text(
        json.dumps({"crystal": {"length_mm": 4.0}, "grid": {"points_per_axis": 256, "half_span_nm": 12.0}})
    )
    assert _run("report", "--config", str(path), "--out", str(tmp_path / "out")) == 0

    report = _load_valid(tmp_path / "out" / "report.json")
    instrument = report["instrument"]
    assert instrument["rbw_source"] == "unfitted"
    assert instrument["rbw_nm"] is None
    assert "not broader" in instrument["reason"]
    assert instrument["theory_marginal_fwhm_nm"] > instrument["measured_marginal_fwhm_nm"]
    assert "convolved_marginal_fwhm_nm" not in instrument
    assert report["spectral"]["entanglement_r"] > 1.0
    assert report["hom"]["dip_fwhm_ps"] > 0.0


def test_configured_rbw_is_applied(tmp_path):
    config = replace(
        parse_config(json.dumps({"grid": {"points_per_axis": 256}, "instrument": {"rbw_nm": 1.0}})),
        output_dir=tmp_path,
    )
    assert cli.run_subcommand("report", config) == 0
    instrument = _load_valid(tmp_path / "report.json")["instrument"]
    assert instrument["rbw_source"] == "configured"
    assert instrument["rbw_nm"] == 1.0
    assert instrument["convolved_coincidence_fwhm_nm"] > instrument["theory_coincidence_fwhm_nm"]


@pytest.mark.slow
def test_default_report_figures_of_merit(tmp_path):
    assert _run("report", "--out", str(tmp_path)) == 0
    report = _load_valid(tmp_path / "report.json")

    spectral = report["spectral"]
    assert spectral["signal_fwhm_nm"] == pytest.approx(2.4, rel=0.10)
    assert spectral["coincidence_fwhm_nm"] == pytest.approx(0.43, rel=0.10)
    assert spectral["entanglement_r"] == pytest.approx(5.58, rel=0.10)
    assert spectral["warnings"] == []

    hom = report["hom"]
    assert hom["visibility"] >= 0.99
    assert hom["dip_fwhm_ps"] == pytest.approx(1.48, rel=0.10)

    instrument = report["instrument"]
    assert instrument["rbw_source"] == "fitted"
    assert instrument["convolved_marginal_fwhm_nm"] == pytest.approx(3.22, abs=0.05)
    assert instrument["coincidence_shift_nm"] > 0.0
    assert report["shg"]["reference_point"]["efficiency"] == pytest.approx(0.526, abs=1e-3)


def test_pm_temp_outputs(tmp_path, capsys):
    assert _run("pm-temp", "--out", str(tmp_path)) == 0
    summary = _load_valid(tmp_path / "pm_temp.json")
    assert summary["spdc"]["temperature_source"] == "degenerate"
    assert summary["measured"] == {"spdc_crystal_temperature_c": 64.0, "shg_crystal_temperature_c": 70.0}
    table = capsys.readouterr().out
    assert "64.0" in table and "70.0" in table

    rows = _read_csv(tmp_path / "tuning.csv")
    assert rows[0] == ["temperature_c", "signal_nm", "idler_nm"]
    assert len(rows) == 1 + 136


def test_shg_curve_outputs(small_config_file, tmp_path):
    assert _run("shg-curve", "--config", str(small_config_file), "--out", str(tmp_path)) == 0
    rows = _read_csv(tmp_path / "shg_curve.csv")
    assert rows[0] == ["p1_W", "pc_W", "p2_W", "rm", "residual"]
    assert len(rows) == 12
    p2 = [float(row[2]) for row in rows[1:]]
    assert p2 == sorted(p2)
    sidecar = _load_valid(tmp_path / "shg_curve.json")
    assert sidecar["points"] == 11
    assert sidecar["failures"] == []


def test_jsa_and_hom_outputs(small_config_file, tmp_path):
    assert _run("jsa", "--config", str(small_config_file), "--out", str(tmp_path)) == 0
    grids = {name: _read_csv(tmp_path / f"{name}.csv") for name in ("jsa", "pump_envelope", "phase_matching")}
    header = grids["jsa"][0]
    assert header[0] == "signal_nm\\idler_nm"
    for rows in grids.values():
        assert rows[0] == header
        assert len(rows) == 257
        assert all(len(row) == 257 for row in rows)
        assert [row[0] for row in rows] == [row[0] for row in grids["jsa"]]

    # row/column 129 is the degenerate node: α = 1 and Φ/L = 1 there
    assert float(grids["pump_envelope"][129][129]) == pytest.approx(1.0, abs=1e-9)
    assert float(grids["phase_matching"][129][129]) == pytest.approx(1.0, abs=1e-6)
    # off the anti-diagonal the pump envelope vanishes
    assert float(grids["pump_envelope"][1][1]) < 1e-9
    assert min(float(v) for row in grids["phase_matching"][1:] for v in row[1:]) < 0.0

    sidecar = _load_valid(tmp_path / "jsa.json")
    assert sidecar["total_probability"] == pytest.approx(1.0, abs=1e-9)
    assert sidecar["maps"] == ["jsa.csv", "pump_envelope.csv", "phase_matching.csv"]

    assert _run("hom", "--config", str(small_config_file), "--out", str(tmp_path)) == 0
    hom = _load_valid(tmp_path / "hom.json")
    assert hom["visibility"] > 0.9
    assert hom["points"] == DEFAULTS["hom"]["points"]


def test_marginals_outputs(small_config_file, tmp_path):
    assert _run("marginals", "--config", str(small_config_file), "--out", str(tmp_path)) == 0
    sidecar = _load_valid(tmp_path / "marginals.json")
    assert sidecar["spectral"]["entanglement_r"] > 1.0
    header = (tmp_path / "marginals.csv").read_text().splitlines()[0]
    assert header == "wavelength_nm,omega_rad_per_ps,signal_density,idler_density,coincidence"


def test_run_subcommand(tmp_path):
    config = replace(RunConfig(), output_dir=tmp_path)
    assert cli.run_subcommand("nonsense", config) == 1
    assert cli.run_subcommand("pm-temp", config) == 0
    assert (tmp_path / "pm_temp.json").exists()


def test_run_subcommand_maps_invalid_parameters_to_exit_1(tmp_path):
    # the grid is only checked when the frequency axis is built
    config = replace(RunConfig(), grid=GridSettings(half_span_nm=2000.0, points_per_axis=256), output_dir=tmp_path)
    assert cli.run_subcommand("jsa", config) == 1
    assert not (tmp_path / "jsa.csv").exists()


def test_load_config_applies_out_override(tmp_path):
    config = cli.load_config(None, str(tmp_path))
    assert config.output_dir == tmp_path
    assert replace(config, output_dir=Path("out")) == parse_config("{}")
