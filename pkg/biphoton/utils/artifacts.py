"""Deterministic CSV grids and JSON sidecars.

CSV: comma separated, ``.`` decimal, LF line endings, 9 significant digits.
JSON: UTF-8, two-space indent, keys in insertion order, NaN written as null.
No timestamps are emitted, so identical inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np

from biphoton.core.dispersion import omega_to_wavelength
from biphoton.core.hom import HomCurve
from biphoton.core.jsa import JsaGrid, Spectrum
from biphoton.core.phasematch import TuningPoint
from biphoton.core.shg import ShgOperatingPoint

logger = logging.getLogger(__name__)

GENERATOR = "biphoton"


def format_number(value: Any) -> str:
    if value is None:
        return ""
    number = float(value)
    if math.isnan(number):
        return "nan"
    return f"{number:.9g}"


def _jsonable(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        return number if math.isfinite(number) else None
    if isinstance(value, Path):
        return str(value)
    return value


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(v) for v in row])
    logger.debug("wrote %s", path)
    return path


def write_json(path: Path, payload: Mapping[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_jsonable(payload), indent=2, ensure_ascii=False, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8", newline="\n")
    logger.debug("wrote %s", path)
    return path


def _sidecar(artifact: str, body: Mapping[str, Any]) -> Dict[str, Any]:
    payload: Dict[str, Any] = {"artifact": artifact, "generator": GENERATOR}
    payload.update(body)
    return payload


def _write_grid(path: Path, signal_axis: np.ndarray, idler_axis: np.ndarray, values: np.ndarray) -> Path:
    wavelengths = omega_to_wavelength(signal_axis)
    header = ["signal_nm\\idler_nm"] + [format_number(w) for w in omega_to_wavelength(idler_axis)]
    rows = ([wavelengths[i], *values[i]] for i in range(values.shape[0]))
    return write_csv(path, header, rows)


def write_jsa(
    out_dir: Path,
    jsa: JsaGrid,
    metadata: Mapping[str, Any],
    maps: Optional[Mapping[str, np.ndarray]] = None,
) -> List[Path]:
    """jsa.csv holds |A|² row-major: rows signal, columns idler, axes in nm.

    Each entry of ``maps`` is written as ``<name>.csv`` on the same axes.
    """
    out_dir = Path(out_dir)
    paths = [_write_grid(out_dir / "jsa.csv", jsa.signal_axis, jsa.idler_axis, jsa.density)]
    for name, values in (maps or {}).items():
        paths.append(_write_grid(out_dir / f"{name}.csv", jsa.signal_axis, jsa.idler_axis, values))
    sidecar = _sidecar(
        "jsa",
        {
            **metadata,
            "grid": jsa.grid.to_dict(),
            "normalization": jsa.normalization,
            "total_probability": jsa.total_probability(),
            "maps": ["jsa.csv", *(f"{name}.csv" for name in (maps or {}))],
            "warnings": list(jsa.warnings),
        },
    )
    paths.append(write_json(out_dir / "jsa.json", sidecar))
    return paths


def write_marginals(
    out_dir: Path,
    signal: Spectrum,
    idler: Spectrum,
    coincidence: Spectrum,
    metadata: Mapping[str, Any],
) -> List[Path]:
    """Spectra on the shared frequency axis, listed with their wavelengths."""
    wavelengths = omega_to_wavelength(signal.axis)
    rows = zip(wavelengths, signal.axis, signal.values, idler.values, coincidence.values)
    csv_path = write_csv(
        Path(out_dir) / "marginals.csv",
        ["wavelength_nm", "omega_rad_per_ps", "signal_density", "idler_density", "coincidence"],
        rows,
    )
    return [csv_path, write_json(Path(out_dir) / "marginals.json", _sidecar("marginals", metadata))]


def write_hom(out_dir: Path, curve: HomCurve, metadata: Mapping[str, Any]) -> List[Path]:
    csv_path = write_csv(Path(out_dir) / "hom.csv", ["delay_ps", "coincidence"], zip(curve.delays, curve.coincidence))
    sidecar = _sidecar("hom", {**curve.to_dict(), **metadata})
    return [csv_path, write_json(Path(out_dir) / "hom.json", sidecar)]


def write_shg_curve(out_dir: Path, curve: Sequence[ShgOperatingPoint], metadata: Mapping[str, Any]) -> List[Path]:
    rows = ((p.p1, p.pc, p.p2, p.rm, p.residual) for p in curve)
    csv_path = write_csv(Path(out_dir) / "shg_curve.csv", ["p1_W", "pc_W", "p2_W", "rm", "residual"], rows)
    failures = [p.to_dict() for p in curve if p.error]
    sidecar = _sidecar("shg_curve", {**metadata, "points": len(curve), "failures": failures})
    return [csv_path, write_json(Path(out_dir) / "shg_curve.json", sidecar)]


def write_pm_temp(out_dir: Path, tuning: Sequence[TuningPoint], summary: Mapping[str, Any]) -> List[Path]:
    rows = ((p.temperature_c, p.signal_nm, p.idler_nm) for p in tuning)
    csv_path = write_csv(Path(out_dir) / "tuning.csv", ["temperature_c", "signal_nm", "idler_nm"], rows)
    return [csv_path, write_json(Path(out_dir) / "pm_temp.json", _sidecar("pm_temp", summary))]


def write_report(out_dir: Path, report: Mapping[str, Any], name: Optional[str] = None) -> Path:
    return write_json(Path(out_dir) / (name or "report.json"), _sidecar("report", report))
