"""bpctl - command line driver for the photon-pair simulator.

Every subcommand reads one RunConfig, runs the physics and writes CSV/JSON
artifacts into the output directory. Exit status: 0 on success, 1 on
configuration or usage errors, 2 on numerical or solver errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Tuple

import numpy as np

from biphoton import __version__
from biphoton.core.config import DEFAULTS, RunConfig, parse_config
from biphoton.core.errors import BiphotonError, CalibrationError, ConfigError
from biphoton.core.hom import dip_curve, dip_fwhm_vs_group_delay, overlap_visibility, signed_overlap
from biphoton.core.jsa import (
    JsaGrid,
    build_jsa,
    coincidence_spectrum,
    convolve_instrument,
    fit_instrument_rbw,
    fwhm_3db,
    marginal_spectrum,
    phase_matching_amplitude,
    pump_envelope,
    spectral_report,
)
from biphoton.core.phasematch import (
    CrystalSpec,
    DEFAULT_BRACKET_C,
    delta_k,
    resolve_operating_point,
    taylor_coefficients,
    tuning_curve,
)
from biphoton.core.shg import CavitySpec, calibrate_gamma, circulating_power, input_power_for, power_curve
from biphoton.utils import artifacts
from biphoton.utils.console import render, setup_logging, summary_table

logger = logging.getLogger("biphoton.cli")

SUBCOMMANDS = ("jsa", "marginals", "hom", "shg-curve", "pm-temp", "report")

# Measured values of the physical source; reported next to the theory, never asserted.
MEASURED: Dict[str, Any] = {
    "signal_center_nm": 1560.23,
    "idler_center_nm": 1560.04,
    "marginal_fwhm_nm": 3.22,
    "coincidence_fwhm_nm": 0.52,
    "entanglement_r": 6.19,
    "hom_visibility": 0.95,
    "hom_dip_fwhm_ps": 1.28,
    "shg_crystal_temperature_c": 70.0,
    "spdc_crystal_temperature_c": 64.0,
    "shg_output_w": 0.742,
    "shg_input_w": 1.41,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        raise UsageError(message)


# ---------------------------------------------------------------------------
# Shared pipeline steps
# ---------------------------------------------------------------------------
def _resolved_crystal(config: RunConfig, crystal: Optional[CrystalSpec] = None) -> CrystalSpec:
    return resolve_operating_point(crystal or config.crystal, config.pump.center_omega)


def _build(config: RunConfig) -> Tuple[CrystalSpec, JsaGrid]:
    crystal = _resolved_crystal(config)
    logger.info(
        "operating point: T=%.4f C, qpm_sign=%+d", crystal.temperature_c, crystal.qpm_sign
    )
    jsa = build_jsa(config.pump, crystal, config.frequency_grid(), phase_matching=config.phase_matching)
    return crystal, jsa


def _metadata(config: RunConfig, crystal: CrystalSpec) -> Dict[str, Any]:
    return {
        "crystal": crystal.to_dict(),
        "pump": config.pump.to_dict(),
        "qpm_sign": crystal.qpm_sign,
        "phase_matching_mode": config.phase_matching,
        "sellmeier": {"name": config.sellmeier.name, "provenance": config.sellmeier.provenance},
    }


def _calibrated_cavity(config: RunConfig) -> Tuple[CavitySpec, Dict[str, Any]]:
    cavity = config.cavity
    if cavity.gamma_sh is not None:
        return cavity, {"gamma_sh": cavity.gamma_sh, "source": "configured"}
    gamma = calibrate_gamma(config.shg.p1_ref_w, config.shg.p2_ref_w, cavity)
    logger.info("gamma_sh calibrated to %.6e 1/W", gamma)
    calibration = {
        "gamma_sh": gamma,
        "source": "calibrated",
        "p1_ref_w": config.shg.p1_ref_w,
        "p2_ref_w": config.shg.p2_ref_w,
        "branch": "rising",
    }
    return cavity.with_gamma(gamma), calibration


def _phase_matching_summary(config: RunConfig, crystal: CrystalSpec) -> Dict[str, Any]:
    resolved = _resolved_crystal(config, crystal)
    pump_center = config.pump.center_omega
    coeffs = taylor_coefficients(resolved, pump_center)
    half = 0.5 * pump_center
    return {
        "temperature_c": resolved.temperature_c,
        "temperature_source": "configured" if crystal.temperature_c is not None else "degenerate",
        "qpm_sign": resolved.qpm_sign,
        "poling_period_um": resolved.poling_period_um,
        "interaction": resolved.interaction,
        "dk0_rad_per_um": float(delta_k(half, half, resolved)),
        "taylor": coeffs.to_dict(),
        "group_delay_ps": abs(coeffs.tau_s - coeffs.tau_i) * resolved.length_um,
    }


def _instrument_summary(config: RunConfig, jsa: JsaGrid) -> Dict[str, Any]:
    signal = marginal_spectrum(jsa, "signal")
    coincidence = coincidence_spectrum(jsa)
    instrument = config.instrument
    theory_coincidence = fwhm_3db(coincidence)
    summary: Dict[str, Any] = {
        "measured_marginal_fwhm_nm": instrument.measured_marginal_fwhm_nm,
        "theory_marginal_fwhm_nm": fwhm_3db(signal),
        "theory_coincidence_fwhm_nm": theory_coincidence,
        "measured_coincidence_fwhm_nm": instrument.measured_coincidence_fwhm_nm,
    }
    if instrument.rbw_nm is None:
        try:
            fit = fit_instrument_rbw(signal, instrument.measured_marginal_fwhm_nm)
        except CalibrationError as exc:
            logger.warning("instrument resolution not fitted: %s", exc)
            summary.update(rbw_nm=None, rbw_source="unfitted", reason=str(exc))
            return summary
        rbw = fit.rbw_nm
        summary.update(rbw_source="fitted", quadrature_rbw_nm=fit.quadrature_rbw_nm)
    else:
        rbw = instrument.rbw_nm
        summary["rbw_source"] = "configured"
    convolved_coincidence = fwhm_3db(convolve_instrument(coincidence, rbw))
    summary.update(
        rbw_nm=rbw,
        convolved_marginal_fwhm_nm=fwhm_3db(convolve_instrument(signal, rbw)),
        convolved_coincidence_fwhm_nm=convolved_coincidence,
        coincidence_shift_nm=convolved_coincidence - theory_coincidence,
        shift_toward_measured=bool(
            abs(convolved_coincidence - instrument.measured_coincidence_fwhm_nm)
            < abs(theory_coincidence - instrument.measured_coincidence_fwhm_nm)
        ),
    )
    return summary


def _fmt(value: float, digits: int = 4) -> str:
    return f"{value:.{digits}f}"


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------
def _theory_maps(config: RunConfig, crystal: CrystalSpec, jsa: JsaGrid) -> Dict[str, np.ndarray]:
    """Pump envelope α and phase-matching function Φ/L on the JSA axes."""
    ws = jsa.signal_axis[:, np.newaxis]
    wi = jsa.idler_axis[np.newaxis, :]
    envelope = pump_envelope(ws, wi, config.pump)
    phase = phase_matching_amplitude(
        ws, wi, crystal, mode=config.phase_matching, pump_center=config.pump.center_omega
    )
    return {"pump_envelope": envelope, "phase_matching": phase / crystal.length_um}


def cmd_jsa(config: RunConfig) -> int:
    crystal, jsa = _build(config)
    paths = artifacts.write_jsa(
        config.output_dir, jsa, _metadata(config, crystal), maps=_theory_maps(config, crystal, jsa)
    )
    logger.info("wrote %s", ", ".join(str(p) for p in paths))
    return 0


def cmd_marginals(config: RunConfig) -> int:
    crystal, jsa = _build(config)
    report = spectral_report(jsa)
    paths = artifacts.write_marginals(
        config.output_dir,
        marginal_spectrum(jsa, "signal"),
        marginal_spectrum(jsa, "idler"),
        coincidence_spectrum(jsa),
        {**_metadata(config, crystal), "spectral": report.to_dict()},
    )
    logger.info("wrote %s", ", ".join(str(p) for p in paths))
    return 0


def cmd_hom(config: RunConfig) -> int:
    crystal, jsa = _build(config)
    curve = dip_curve(jsa, config.hom.delay_span_ps, config.hom.points)
    extra = {
        **_metadata(config, crystal),
        "overlap_visibility": overlap_visibility(jsa),
        "signed_overlap": signed_overlap(jsa),
        "group_delay_estimate_ps": dip_fwhm_vs_group_delay(crystal, config.pump.center_omega),
    }
    paths = artifacts.write_hom(config.output_dir, curve, extra)
    logger.info("wrote %s", ", ".join(str(p) for p in paths))
    return 0


def cmd_shg_curve(config: RunConfig) -> int:
    cavity, calibration = _calibrated_cavity(config)
    p1_values = np.linspace(0.0, config.shg.p1_max_w, config.shg.points)
    curve = power_curve(p1_values, cavity)
    reference = circulating_power(config.shg.p1_ref_w, cavity)
    metadata = {
        "cavity": cavity.to_dict(),
        "calibration": calibration,
        "reference_point": reference.to_dict(),
        "pump_power_w": config.pump.power_w,
        "fundamental_for_pump_power_w": input_power_for(config.pump.power_w, cavity),
    }
    paths = artifacts.write_shg_curve(config.output_dir, curve, metadata)
    logger.info("wrote %s", ", ".join(str(p) for p in paths))
    return 0


def cmd_pm_temp(config: RunConfig) -> int:
    spdc = _phase_matching_summary(config, config.crystal)
    shg = _phase_matching_summary(config, config.shg_crystal)
    lo, hi = DEFAULT_BRACKET_C
    temperatures = np.arange(lo, hi + 0.5, 1.0)
    tuning = tuning_curve(config.crystal, config.pump.center_omega, temperatures)
    summary = {
        "bracket_c": list(DEFAULT_BRACKET_C),
        "spdc": spdc,
        "shg": shg,
        "measured": {
            "spdc_crystal_temperature_c": MEASURED["spdc_crystal_temperature_c"],
            "shg_crystal_temperature_c": MEASURED["shg_crystal_temperature_c"],
        },
    }
    paths = artifacts.write_pm_temp(config.output_dir, tuning, summary)
    rows = [
        (
            name,
            _fmt(block["temperature_c"]),
            _fmt(MEASURED[measured_key], 1),
            f"{block['qpm_sign']:+d}",
            f"{block['dk0_rad_per_um']:.3e}",
        )
        for name, block, measured_key in (
            ("SPDC (type-II)", spdc, "spdc_crystal_temperature_c"),
            ("SHG (type-I)", shg, "shg_crystal_temperature_c"),
        )
    ]
    columns = ("crystal", "T model [C]", "T measured [C]", "qpm_sign", "dk0 [rad/um]")
    render(summary_table("Phase-matching temperature", rows, columns))
    logger.info("wrote %s", ", ".join(str(p) for p in paths))
    return 0


def cmd_report(config: RunConfig) -> int:
    crystal, jsa = _build(config)
    spectral = spectral_report(jsa)
    curve = dip_curve(jsa, config.hom.delay_span_ps, config.hom.points)
    cavity, calibration = _calibrated_cavity(config)
    reference = circulating_power(config.shg.p1_ref_w, cavity)

    report = {
        **_metadata(config, crystal),
        "spectral": spectral.to_dict(),
        "hom": {
            **curve.to_dict(),
            "overlap_visibility": overlap_visibility(jsa),
            "signed_overlap": signed_overlap(jsa),
            "group_delay_estimate_ps": dip_fwhm_vs_group_delay(crystal, config.pump.center_omega),
        },
        "instrument": _instrument_summary(config, jsa),
        "shg": {"cavity": cavity.to_dict(), "calibration": calibration, "reference_point": reference.to_dict()},
        "phase_matching": {
            "spdc": _phase_matching_summary(config, config.crystal),
            "shg": _phase_matching_summary(config, config.shg_crystal),
        },
        "experimental": {**MEASURED, "note": "measured values for comparison; not reproduced by the model"},
    }
    path = artifacts.write_report(config.output_dir, report)

    rows = [
        ("signal / idler center [nm]", f"{spectral.signal_center_nm:.2f} / {spectral.idler_center_nm:.2f}"),
        ("marginal FWHM [nm]", _fmt(spectral.signal_fwhm_nm, 3)),
        ("coincidence FWHM [nm]", _fmt(spectral.coincidence_fwhm_nm, 3)),
        ("R", _fmt(spectral.entanglement_r, 2)),
        ("Schmidt K", _fmt(spectral.schmidt_k, 2)),
        ("HOM visibility", _fmt(curve.visibility, 5)),
        ("HOM dip FWHM [ps]", _fmt(curve.dip_fwhm, 3)),
        ("SHG P2 at reference [W]", _fmt(reference.p2, 6)),
        (
            "T_deg SPDC model / measured [C]",
            f"{crystal.temperature_c:.3f} / {MEASURED['spdc_crystal_temperature_c']:.1f}",
        ),
    ]
    render(summary_table("Photon-pair source report", rows))
    logger.info("wrote %s", path)
    return 0


HANDLERS = {
    "jsa": cmd_jsa,
    "marginals": cmd_marginals,
    "hom": cmd_hom,
    "shg-curve": cmd_shg_curve,
    "pm-temp": cmd_pm_temp,
    "report": cmd_report,
}


# ---------------------------------------------------------------------------
# CLI entrypoint
# ---------------------------------------------------------------------------
def _common_options() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="Path to a JSON or YAML run configuration")
    common.add_argument("--out", default=argparse.SUPPRESS, help="Output directory (overrides output_dir)")
    common.add_argument("--verbose", action="store_true", default=argparse.SUPPRESS, help="Debug logging")
    common.add_argument(
        "--seedless", action="store_true", default=argparse.SUPPRESS, help="Reserved; the simulator has no RNG"
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = _Parser(prog="bpctl", description="1560 nm photon-pair source simulator", parents=[common])
    parser.add_argument("--print-defaults", action="store_true", help="Print the default configuration and exit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command")
    sub.add_parser("jsa", parents=[common], help="Joint spectral density grid")
    sub.add_parser("marginals", parents=[common], help="Marginal and coincidence spectra with widths")
    sub.add_parser("hom", parents=[common], help="Hong-Ou-Mandel dip curve")
    sub.add_parser("shg-curve", parents=[common], help="SHG cavity output power curve")
    sub.add_parser("pm-temp", parents=[common], help="Degenerate phase-matching temperatures")
    sub.add_parser("report", parents=[common], help="All figures of merit in one JSON report")
    return parser


def load_config(config_path: Optional[str], out: Optional[str] = None) -> RunConfig:
    config = RunConfig.from_file(config_path) if config_path else parse_config("{}")
    if out:
        config = replace(config, output_dir=Path(out))
    return config


def main(argv: Iterable[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except UsageError as exc:
        print(f"bpctl: error: {exc}", file=sys.stderr)
        return 1

    setup_logging(verbose=bool(getattr(args, "verbose", False)))

    if args.print_defaults:
        print(json.dumps(DEFAULTS, indent=2))
        return 0
    if getattr(args, "seedless", False):
        logger.error("--seedless is reserved: the simulator is deterministic and has no RNG")
        return 1
    if args.command not in HANDLERS:
        parser.print_usage(sys.stderr)
        print("bpctl: error: a subcommand is required: " + ", ".join(SUBCOMMANDS), file=sys.stderr)
        return 1

    try:
        config = load_config(getattr(args, "config", None), getattr(args, "out", None))
    except ConfigError as exc:
        logger.error("configuration error: %s", exc)
        return 1
    return run_subcommand(args.command, config)


def run_subcommand(name: str, config: RunConfig) -> int:
    """Library entry for tests and scripts; same exit codes as :func:`main`."""
    if name not in HANDLERS:
        logger.error("unknown subcommand %r", name)
        return 1
    try:
        return HANDLERS[name](config)
    except ConfigError as exc:
        logger.error("configuration error: %s", exc)
        return 1
    except BiphotonError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return 2
    except ValueError as exc:
        logger.error("invalid parameters: %s", exc)
        return 1
