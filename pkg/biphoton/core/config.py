"""Run configuration: strict JSON/YAML ingestion with documented defaults."""
from __future__ import annotations

import copy
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import yaml

from .dispersion import KTP_SELLMEIER, OpticalAxis, SellmeierSet
from .errors import ConfigError
from .jsa import BANDWIDTH_CONVENTIONS, PHASE_MATCHING_MODES, FrequencyGrid, PumpSpec
from .phasematch import AxisAssignment, CrystalSpec
from .shg import CavitySpec

logger = logging.getLogger(__name__)


DEFAULTS: Dict[str, Any] = {
    "crystal": {
        "length_mm": 10.0,
        "poling_period_um": 46.146,
        "temperature_c": None,
        "qpm_sign": None,
        "interaction": "type-II",
        "pump_axis": "Y",
        "signal_axis": "Y",
        "idler_axis": "Z",
    },
    "shg_crystal": {
        "length_mm": 10.0,
        "poling_period_um": 24.925,
        "temperature_c": None,
        "qpm_sign": None,
        "interaction": "type-I",
        "pump_axis": "Z",
        "signal_axis": "Z",
        "idler_axis": "Z",
    },
    "pump": {
        "center_wavelength_nm": 780.0,
        "bandwidth_3db_nm": 0.05,
        "power_w": 0.742,
        "bandwidth_convention": "amplitude_width",
    },
    "cavity": {
        "r1": 0.95,
        "t1": 0.05,
        "r2": 0.999,
        "t2": 0.001,
        "t2sh": 0.952,
        "delta": 0.01,
        "gamma_sh": None,
    },
    "shg": {
        "p1_ref_w": 1.41,
        "p2_ref_w": 0.742,
        "p1_max_w": 1.5,
        "points": 151,
    },
    "grid": {
        "half_span_nm": 6.0,
        "points_per_axis": 1024,
    },
    "jsa": {
        "phase_matching": "exact",
    },
    "hom": {
        "delay_span_ps": 6.0,
        "points": 1201,
    },
    "instrument": {
        "rbw_nm": None,
        "measured_marginal_fwhm_nm": 3.22,
        "measured_coincidence_fwhm_nm": 0.52,
    },
    "sellmeier": None,
    "output_dir": "out",
}


@dataclass(frozen=True)
class ShgSettings:
    p1_ref_w: float = 1.41
    p2_ref_w: float = 0.742
    p1_max_w: float = 1.5
    points: int = 151


@dataclass(frozen=True)
class GridSettings:
    half_span_nm: float = 6.0
    points_per_axis: int = 1024


@dataclass(frozen=True)
class HomSettings:
    delay_span_ps: float = 6.0
    points: int = 1201


@dataclass(frozen=True)
class InstrumentSettings:
    rbw_nm: Optional[float] = None
    measured_marginal_fwhm_nm: float = 3.22
    measured_coincidence_fwhm_nm: float = 0.52


@dataclass(frozen=True)
class RunConfig:
    """Fully validated simulator configuration."""

    crystal: CrystalSpec = field(default_factory=CrystalSpec)
    shg_crystal: CrystalSpec = field(
        default_factory=lambda: CrystalSpec(
            poling_period_um=24.925,
            axes=AxisAssignment(OpticalAxis.Z, OpticalAxis.Z, OpticalAxis.Z),
            interaction="type-I",
        )
    )
    pump: PumpSpec = field(default_factory=PumpSpec)
    cavity: CavitySpec = field(default_factory=CavitySpec)
    shg: ShgSettings = field(default_factory=ShgSettings)
    grid: GridSettings = field(default_factory=GridSettings)
    phase_matching: str = "exact"
    hom: HomSettings = field(default_factory=HomSettings)
    instrument: InstrumentSettings = field(default_factory=InstrumentSettings)
    sellmeier: SellmeierSet = KTP_SELLMEIER
    sellmeier_source: Union[None, str, Dict[str, Any]] = None
    output_dir: Path = Path("out")

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "RunConfig":
        path = Path(path)
        try:
            raw = path.read_bytes()
        except OSError as exc:
            raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ConfigError("<root>", "document is not valid UTF-8", offset=exc.start) from None
        fmt = "yaml" if path.suffix.lower() in (".yaml", ".yml") else "json"
        return parse_config(text, fmt=fmt, base_dir=path.parent)

    def frequency_grid(self) -> FrequencyGrid:
        return FrequencyGrid.around_pump(self.pump, self.grid.half_span_nm, self.grid.points_per_axis)

    def to_dict(self) -> Dict[str, Any]:
        """Document form accepted back by :func:`parse_config`."""
        if isinstance(self.sellmeier_source, str) or self.sellmeier_source is None:
            sellmeier: Any = self.sellmeier_source
        else:
            sellmeier = self.sellmeier.to_dict()
        return {
            "crystal": _crystal_dict(self.crystal),
            "shg_crystal": _crystal_dict(self.shg_crystal),
            "pump": {
                "center_wavelength_nm": self.pump.center_wavelength_nm,
                "bandwidth_3db_nm": self.pump.bandwidth_3db_nm,
                "power_w": self.pump.power_w,
                "bandwidth_convention": self.pump.bandwidth_convention,
            },
            "cavity": self.cavity.to_dict(),
            "shg": {
                "p1_ref_w": self.shg.p1_ref_w,
                "p2_ref_w": self.shg.p2_ref_w,
                "p1_max_w": self.shg.p1_max_w,
                "points": self.shg.points,
            },
            "grid": {"half_span_nm": self.grid.half_span_nm, "points_per_axis": self.grid.points_per_axis},
            "jsa": {"phase_matching": self.phase_matching},
            "hom": {"delay_span_ps": self.hom.delay_span_ps, "points": self.hom.points},
            "instrument": {
                "rbw_nm": self.instrument.rbw_nm,
                "measured_marginal_fwhm_nm": self.instrument.measured_marginal_fwhm_nm,
                "measured_coincidence_fwhm_nm": self.instrument.measured_coincidence_fwhm_nm,
            },
            "sellmeier": sellmeier,
            "output_dir": str(self.output_dir),
        }


def _crystal_dict(crystal: CrystalSpec) -> Dict[str, Any]:
    return {
        "length_mm": crystal.length_mm,
        "poling_period_um": crystal.poling_period_um,
        "temperature_c": crystal.temperature_c,
        "qpm_sign": crystal.qpm_sign,
        "interaction": crystal.interaction,
        "pump_axis": crystal.axes.pump.value,
        "signal_axis": crystal.axes.signal.value,
        "idler_axis": crystal.axes.idler.value,
    }


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------
def _load_document(text: str, fmt: str) -> Any:
    if fmt == "json":
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            offset = len(text[: exc.pos].encode("utf-8"))
            raise ConfigError("<root>", f"malformed JSON: {exc.msg}", offset=offset) from None
    if fmt == "yaml":
        try:
            return yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            offset = len(text[: mark.index].encode("utf-8")) if mark is not None else None
            raise ConfigError("<root>", f"malformed YAML: {getattr(exc, 'problem', exc)}", offset=offset) from None
    raise ValueError(f"unsupported config format {fmt!r}")


def _section(document: Mapping[str, Any], name: str) -> Dict[str, Any]:
    defaults = DEFAULTS[name]
    given = document.get(name)
    if given is None:
        return copy.deepcopy(defaults)
    if not isinstance(given, Mapping):
        raise ConfigError(name, "must be a mapping")
    for key in given:
        if key not in defaults:
            raise ConfigError(f"{name}.{key}", f"unknown key '{name}.{key}'")
    merged = copy.deepcopy(defaults)
    merged.update(given)
    return merged


def _number(
    section: Mapping[str, Any],
    key: str,
    path: str,
    *,
    positive: bool = False,
    optional: bool = False,
) -> Optional[float]:
    value = section[key]
    where = f"{path}.{key}"
    if value is None:
        if optional:
            return None
        raise ConfigError(where, "must not be null")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(where, f"expected a number, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(where, f"must be positive, got {value}")
    return float(value)


def _integer(section: Mapping[str, Any], key: str, path: str, minimum: int) -> int:
    value = section[key]
    where = f"{path}.{key}"
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(where, f"expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(where, f"must be >= {minimum}, got {value}")
    return value


def _choice(section: Mapping[str, Any], key: str, path: str, options: tuple) -> str:
    value = section[key]
    if value not in options:
        raise ConfigError(f"{path}.{key}", f"must be one of {list(options)}, got {value!r}")
    return value


def _build_crystal(section: Mapping[str, Any], path: str, sellmeier: SellmeierSet) -> CrystalSpec:
    axes = AxisAssignment(
        pump=OpticalAxis.parse(section["pump_axis"], f"{path}.pump_axis"),
        signal=OpticalAxis.parse(section["signal_axis"], f"{path}.signal_axis"),
        idler=OpticalAxis.parse(section["idler_axis"], f"{path}.idler_axis"),
    )
    interaction = _choice(section, "interaction", path, ("type-I", "type-II"))
    if axes.kind != interaction:
        raise ConfigError(f"{path}.idler_axis", f"{interaction} requires " + (
            "signal_axis != idler_axis" if interaction == "type-II" else "signal_axis == idler_axis"
        ))
    qpm_sign = section["qpm_sign"]
    if qpm_sign is not None and (isinstance(qpm_sign, bool) or qpm_sign not in (1, -1)):
        raise ConfigError(f"{path}.qpm_sign", f"must be +1, -1 or null, got {qpm_sign!r}")
    for axis in (axes.pump, axes.signal, axes.idler):
        if axis not in sellmeier.axes:
            raise ConfigError("sellmeier.axes", f"no coefficients for axis {axis.value} used by {path}")
    return CrystalSpec(
        length_mm=_number(section, "length_mm", path, positive=True),
        poling_period_um=_number(section, "poling_period_um", path, positive=True),
        temperature_c=_number(section, "temperature_c", path, optional=True),
        qpm_sign=qpm_sign,
        axes=axes,
        interaction=interaction,
        sellmeier=sellmeier,
    )


def _fraction(section: Mapping[str, Any], key: str, path: str) -> float:
    value = _number(section, key, path)
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"{path}.{key}", f"must lie in [0, 1], got {value}")
    return value


def _build_cavity(section: Mapping[str, Any]) -> CavitySpec:
    values = {key: _fraction(section, key, "cavity") for key in ("r1", "t1", "r2", "t2", "t2sh")}
    if values["r1"] + values["t1"] > 1.0 + 1e-12:
        raise ConfigError("cavity.t1", "r1 + t1 must not exceed 1")
    if values["r2"] + values["t2"] > 1.0 + 1e-12:
        raise ConfigError("cavity.t2", "r2 + t2 must not exceed 1")
    delta = _fraction(section, "delta", "cavity")
    if delta >= 1.0:
        raise ConfigError("cavity.delta", "must be below 1")
    gamma = _number(section, "gamma_sh", "cavity", optional=True)
    if gamma is not None and gamma < 0:
        raise ConfigError("cavity.gamma_sh", f"must be non-negative, got {gamma}")
    return CavitySpec(delta=delta, gamma_sh=gamma, **values)


def load_sellmeier(path: Union[str, Path], field_name: str = "sellmeier") -> SellmeierSet:
    """Read a coefficient override file (JSON or YAML)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(field_name, f"cannot read {path}: {exc.strerror}") from None
    fmt = "yaml" if path.suffix.lower() in (".yaml", ".yml") else "json"
    return SellmeierSet.from_dict(_load_document(text, fmt), field_name)


def _resolve_sellmeier(value: Any, base_dir: Optional[Path]) -> SellmeierSet:
    if value is None:
        return KTP_SELLMEIER
    if isinstance(value, str):
        path = Path(value)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        return load_sellmeier(path)
    if isinstance(value, Mapping):
        return SellmeierSet.from_dict(value, "sellmeier")
    raise ConfigError("sellmeier", "expected null, a file path or an inline coefficient mapping")


def parse_config(text: str, fmt: str = "json", base_dir: Optional[Path] = None) -> RunConfig:
    """Validate a configuration document and fill in the defaults."""
    document = _load_document(text, fmt)
    if document is None:
        document = {}
    if not isinstance(document, Mapping):
        raise ConfigError("<root>", "configuration root must be a mapping")
    for key in document:
        if key not in DEFAULTS:
            raise ConfigError(str(key), f"unknown key '{key}'")

    sellmeier_source = document.get("sellmeier")
    sellmeier = _resolve_sellmeier(sellmeier_source, base_dir)

    pump_section = _section(document, "pump")
    pump = PumpSpec(
        center_wavelength_nm=_number(pump_section, "center_wavelength_nm", "pump", positive=True),
        bandwidth_3db_nm=_number(pump_section, "bandwidth_3db_nm", "pump", positive=True),
        power_w=_number(pump_section, "power_w", "pump", positive=True),
        bandwidth_convention=_choice(pump_section, "bandwidth_convention", "pump", BANDWIDTH_CONVENTIONS),
    )

    shg_section = _section(document, "shg")
    shg = ShgSettings(
        p1_ref_w=_number(shg_section, "p1_ref_w", "shg", positive=True),
        p2_ref_w=_number(shg_section, "p2_ref_w", "shg", positive=True),
        p1_max_w=_number(shg_section, "p1_max_w", "shg", positive=True),
        points=_integer(shg_section, "points", "shg", 2),
    )

    grid_section = _section(document, "grid")
    points_per_axis = _integer(grid_section, "points_per_axis", "grid", 64)
    if points_per_axis % 2:
        raise ConfigError("grid.points_per_axis", f"must be even and >= 64, got {points_per_axis}")
    half_span_nm = _number(grid_section, "half_span_nm", "grid", positive=True)
    if half_span_nm >= 2.0 * pump.center_wavelength_nm:
        raise ConfigError("grid.half_span_nm", "span reaches non-positive frequencies")

    hom_section = _section(document, "hom")
    instrument_section = _section(document, "instrument")
    rbw = _number(instrument_section, "rbw_nm", "instrument", optional=True)
    if rbw is not None and rbw < 0:
        raise ConfigError("instrument.rbw_nm", f"must be non-negative, got {rbw}")

    output_dir = document.get("output_dir", DEFAULTS["output_dir"])
    if not isinstance(output_dir, str) or not output_dir:
        raise ConfigError("output_dir", "must be a non-empty path string")
    output_path = Path(output_dir)
    if output_path.exists() and not output_path.is_dir():
        raise ConfigError("output_dir", f"{output_dir} exists and is not a directory")

    config = RunConfig(
        crystal=_build_crystal(_section(document, "crystal"), "crystal", sellmeier),
        shg_crystal=_build_crystal(_section(document, "shg_crystal"), "shg_crystal", sellmeier),
        pump=pump,
        cavity=_build_cavity(_section(document, "cavity")),
        shg=shg,
        grid=GridSettings(half_span_nm=half_span_nm, points_per_axis=points_per_axis),
        phase_matching=_choice(_section(document, "jsa"), "phase_matching", "jsa", PHASE_MATCHING_MODES),
        hom=HomSettings(
            delay_span_ps=_number(hom_section, "delay_span_ps", "hom", positive=True),
            points=_integer(hom_section, "points", "hom", 3),
        ),
        instrument=InstrumentSettings(
            rbw_nm=rbw,
            measured_marginal_fwhm_nm=_number(
                instrument_section, "measured_marginal_fwhm_nm", "instrument", positive=True
            ),
            measured_coincidence_fwhm_nm=_number(
                instrument_section, "measured_coincidence_fwhm_nm", "instrument", positive=True
            ),
        ),
        sellmeier=sellmeier,
        sellmeier_source=sellmeier.to_dict() if isinstance(sellmeier_source, Mapping) else sellmeier_source,
        output_dir=output_path,
    )
    logger.debug("configuration parsed (sellmeier=%s)", sellmeier.name)
    return config
