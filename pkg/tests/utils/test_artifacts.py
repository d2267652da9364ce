import csv
import json
import math

import numpy as np
import pytest

from biphoton.core.shg import ShgOperatingPoint
from biphoton.utils import artifacts

pytestmark = pytest.mark.unit


@pytest.mark.parametrize(
    "value, text",
    [
        (1560.0, "1560"),
        (0.1234567891234, "0.123456789"),
        (1.5e-12, "1.5e-12"),
        (np.float64(2.0), "2"),
        (float("nan"), "nan"),
        (None, ""),
    ],
)
def test_format_number(value, text):
    assert artifacts.format_number(value) == text


def test_json_writes_nan_as_null(tmp_path):
    path = artifacts.write_json(
        tmp_path / "x.json",
        {"width": float("nan"), "values": np.array([1.0, np.inf]), "flag": np.bool_(True), "n": np.int64(3)},
    )
    raw = path.read_bytes()
    assert b"\r\n" not in raw and raw.endswith(b"\n")
    assert json.loads(raw) == {"width": None, "values": [1.0, None], "flag": True, "n": 3}


def test_csv_uses_lf_line_endings(tmp_path):
    path = artifacts.write_csv(tmp_path / "nested" / "x.csv", ["a", "b"], [(1.0, 2.5), (math.pi, float("nan"))])
    assert path.read_bytes() == b"a,b\n1,2.5\n3.14159265,nan\n"


def test_jsa_artifact_shape(separable_jsa, tmp_path):
    csv_path, json_path = artifacts.write_jsa(tmp_path, separable_jsa, {"source": "separable"})
    with csv_path.open(newline="") as handle:
        rows = list(csv.reader(handle))
    n = separable_jsa.grid.points_per_axis
    assert len(rows) == n + 1
    assert rows[0][0] == "signal_nm\\idler_nm"
    assert all(len(row) == n + 1 for row in rows)

    sidecar = json.loads(json_path.read_text())
    assert sidecar["artifact"] == "jsa"
    assert sidecar["generator"] == artifacts.GENERATOR
    assert sidecar["source"] == "separable"


def test_jsa_artifact_is_byte_stable(separable_jsa, tmp_path):
    first = artifacts.write_jsa(tmp_path / "a", separable_jsa, {})
    second = artifacts.write_jsa(tmp_path / "b", separable_jsa, {})
    for a, b in zip(first, second):
        assert a.read_bytes() == b.read_bytes()


def test_jsa_maps_share_the_grid_axes(separable_jsa, tmp_path):
    ones = np.ones_like(separable_jsa.amplitude)
    paths = artifacts.write_jsa(tmp_path, separable_jsa, {}, maps={"pump_envelope": ones, "phase_matching": -ones})
    assert [p.name for p in paths] == ["jsa.csv", "pump_envelope.csv", "phase_matching.csv", "jsa.json"]

    density_rows = paths[0].read_text().splitlines()
    phase_rows = paths[2].read_text().splitlines()
    assert phase_rows[0] == density_rows[0]
    assert [row.split(",", 1)[0] for row in phase_rows] == [row.split(",", 1)[0] for row in density_rows]
    assert set(phase_rows[1].split(",")[1:]) == {"-1"}
    assert json.loads(paths[3].read_text())["maps"] == ["jsa.csv", "pump_envelope.csv", "phase_matching.csv"]


def test_shg_sidecar_lists_failures(tmp_path):
    nan = float("nan")
    curve = [
        ShgOperatingPoint(p1=0.5, pc=10.0, p2=0.1, rm=0.9, residual=0.0),
        ShgOperatingPoint(p1=1.0, pc=nan, p2=nan, rm=nan, residual=nan, error="did not converge"),
    ]
    csv_path, json_path = artifacts.write_shg_curve(tmp_path, curve, {})
    assert csv_path.read_text().splitlines()[2] == "1,nan,nan,nan,nan"
    sidecar = json.loads(json_path.read_text())
    assert sidecar["points"] == 2
    assert [f["p1_w"] for f in sidecar["failures"]] == [1.0]
    assert sidecar["failures"][0]["p2_w"] is None
