"""Quasi-phase-matched wavevector mismatch and the degeneracy temperature solve."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np
from scipy.optimize import bisect, brentq

from .dispersion import (
    KTP_SELLMEIER,
    ArrayLike,
    OpticalAxis,
    SellmeierSet,
    group_derivative,
    omega_to_wavelength,
    propagation_constant,
)
from .errors import PhaseMatchingError, SolverError

logger = logging.getLogger(__name__)

DEFAULT_BRACKET_C: Tuple[float, float] = (15.0, 150.0)
DK0_TOLERANCE = 1e-9  # rad/μm


@dataclass(frozen=True)
class AxisAssignment:
    """Principal axes carrying pump, signal and idler."""

    pump: OpticalAxis
    signal: OpticalAxis
    idler: OpticalAxis

    @property
    def kind(self) -> str:
        return "type-I" if self.signal == self.idler else "type-II"

    def swapped(self) -> "AxisAssignment":
        return AxisAssignment(pump=self.pump, signal=self.idler, idler=self.signal)

    def to_dict(self) -> Dict[str, str]:
        return {"pump": self.pump.value, "signal": self.signal.value, "idler": self.idler.value}


TYPE_II_YYZ = AxisAssignment(OpticalAxis.Y, OpticalAxis.Y, OpticalAxis.Z)
TYPE_I_ZZZ = AxisAssignment(OpticalAxis.Z, OpticalAxis.Z, OpticalAxis.Z)


@dataclass(frozen=True)
class CrystalSpec:
    """Poled crystal geometry and operating point.

    ``temperature_c`` and ``qpm_sign`` may be left as ``None`` until
    :func:`resolve_operating_point` fills them in.
    """

    length_mm: float = 10.0
    poling_period_um: float = 46.146
    temperature_c: Optional[float] = None
    qpm_sign: Optional[int] = None
    axes: AxisAssignment = TYPE_II_YYZ
    interaction: str = "type-II"
    sellmeier: SellmeierSet = KTP_SELLMEIER

    def __post_init__(self) -> None:
        if not self.length_mm > 0:
            raise ValueError(f"crystal length must be positive, got {self.length_mm}")
        if not self.poling_period_um > 0:
            raise ValueError(f"poling period must be positive, got {self.poling_period_um}")
        if self.qpm_sign not in (None, 1, -1):
            raise ValueError(f"qpm_sign must be +1 or -1, got {self.qpm_sign}")
        if self.interaction not in ("type-I", "type-II"):
            raise ValueError(f"unknown interaction {self.interaction!r}")
        if self.axes.kind != self.interaction:
            raise ValueError(
                f"{self.interaction} crystal needs "
                + ("signal_axis != idler_axis" if self.interaction == "type-II" else "signal_axis == idler_axis")
            )

    @property
    def length_um(self) -> float:
        return self.length_mm * 1e3

    @property
    def grating_wavenumber(self) -> float:
        """2π/Λ in rad/μm."""
        return 2.0 * math.pi / self.poling_period_um

    def at(self, temperature_c: Optional[float] = None, qpm_sign: Optional[int] = None) -> "CrystalSpec":
        changes: Dict[str, Any] = {}
        if temperature_c is not None:
            changes["temperature_c"] = float(temperature_c)
        if qpm_sign is not None:
            changes["qpm_sign"] = int(qpm_sign)
        return replace(self, **changes)

    def operating_point(self) -> Tuple[float, int]:
        if self.temperature_c is None or self.qpm_sign is None:
            raise ValueError("crystal temperature and qpm_sign must be resolved first")
        return self.temperature_c, self.qpm_sign

    def to_dict(self) -> Dict[str, Any]:
        return {
            "length_mm": self.length_mm,
            "poling_period_um": self.poling_period_um,
            "temperature_c": self.temperature_c,
            "qpm_sign": self.qpm_sign,
            "interaction": self.interaction,
            "axes": self.axes.to_dict(),
            "sellmeier": self.sellmeier.name,
        }


@dataclass(frozen=True)
class TaylorCoefficients:
    """First-order expansion of Δk about ωs = ωi = ωp⁰/2."""

    tau_s: float  # ps/μm, k_p'(ωp⁰) - k_s'(ωp⁰/2)
    tau_i: float  # ps/μm, k_p'(ωp⁰) - k_i'(ωp⁰/2)
    dk0: float  # rad/μm
    pump_center: float  # rad/ps

    def to_dict(self) -> Dict[str, float]:
        return {"tau_s": self.tau_s, "tau_i": self.tau_i, "dk0": self.dk0, "pump_center": self.pump_center}


@dataclass(frozen=True)
class TuningPoint:
    temperature_c: float
    signal_nm: float
    idler_nm: float

    def to_dict(self) -> Dict[str, float]:
        return {"temperature_c": self.temperature_c, "signal_nm": self.signal_nm, "idler_nm": self.idler_nm}


# ---------------------------------------------------------------------------
# Mismatch
# ---------------------------------------------------------------------------
def _mismatch(ws: ArrayLike, wi: ArrayLike, crystal: CrystalSpec, temperature_c: float, qpm_sign: int) -> ArrayLike:
    ws = np.asarray(ws, dtype=float)
    wi = np.asarray(wi, dtype=float)
    axes, coeffs = crystal.axes, crystal.sellmeier
    kp = propagation_constant(axes.pump, ws + wi, temperature_c, coeffs)
    ks = propagation_constant(axes.signal, ws, temperature_c, coeffs)
    ki = propagation_constant(axes.idler, wi, temperature_c, coeffs)
    return kp - ks - ki + qpm_sign * crystal.grating_wavenumber


def delta_k(ws: ArrayLike, wi: ArrayLike, crystal: CrystalSpec) -> ArrayLike:
    """Exact Δk = k_p(ωs+ωi) − k_s(ωs) − k_i(ωi) ± 2π/Λ in rad/μm."""
    temperature_c, qpm_sign = crystal.operating_point()
    return _mismatch(ws, wi, crystal, temperature_c, qpm_sign)


def _dk0(crystal: CrystalSpec, pump_center: float, temperature_c: float, qpm_sign: int) -> float:
    half = 0.5 * pump_center
    return float(_mismatch(half, half, crystal, temperature_c, qpm_sign))


def taylor_coefficients(crystal: CrystalSpec, pump_center: float) -> TaylorCoefficients:
    temperature_c, qpm_sign = crystal.operating_point()
    axes, coeffs = crystal.axes, crystal.sellmeier
    half = 0.5 * pump_center
    kp1 = group_derivative(axes.pump, pump_center, temperature_c, coeffs)
    ks1 = group_derivative(axes.signal, half, temperature_c, coeffs)
    ki1 = group_derivative(axes.idler, half, temperature_c, coeffs)
    return TaylorCoefficients(
        tau_s=float(kp1 - ks1),
        tau_i=float(kp1 - ki1),
        dk0=_dk0(crystal, pump_center, temperature_c, qpm_sign),
        pump_center=float(pump_center),
    )


def taylor_delta_k(ws: ArrayLike, wi: ArrayLike, coeffs: TaylorCoefficients) -> ArrayLike:
    """Δk ≈ dk0 − tau_s·Ωs − tau_i·Ωi, linear in the detunings."""
    half = 0.5 * coeffs.pump_center
    omega_s = np.asarray(ws, dtype=float) - half
    omega_i = np.asarray(wi, dtype=float) - half
    result = coeffs.dk0 - coeffs.tau_s * omega_s - coeffs.tau_i * omega_i
    return float(result) if np.ndim(result) == 0 else result


# ---------------------------------------------------------------------------
# Operating point
# ---------------------------------------------------------------------------
def _has_sign_change(crystal: CrystalSpec, pump_center: float, bracket: Tuple[float, float], qpm_sign: int) -> bool:
    lo = _dk0(crystal, pump_center, bracket[0], qpm_sign)
    hi = _dk0(crystal, pump_center, bracket[1], qpm_sign)
    return lo * hi <= 0.0


def resolve_qpm_sign(
    crystal: CrystalSpec,
    pump_center: float,
    bracket: Tuple[float, float] = DEFAULT_BRACKET_C,
) -> int:
    """Pick the grating sign whose dk0(T) crosses zero inside the bracket."""
    if crystal.qpm_sign is not None:
        return crystal.qpm_sign
    for sign in (1, -1):
        if _has_sign_change(crystal, pump_center, bracket, sign):
            logger.debug("qpm_sign resolved to %+d on bracket %s", sign, bracket)
            return sign
    endpoints = {
        f"dk0({sign:+d}, {t:g} C)": _dk0(crystal, pump_center, t, sign) for sign in (1, -1) for t in bracket
    }
    raise PhaseMatchingError("no phase-matching temperature in range for either grating sign", endpoints)


def degenerate_temperature(
    crystal: CrystalSpec,
    pump_center: float,
    bracket: Tuple[float, float] = DEFAULT_BRACKET_C,
) -> float:
    """Bisection root of dk0(T) = 0; the crystal's own temperature is ignored."""
    qpm_sign = resolve_qpm_sign(crystal, pump_center, bracket)
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise ValueError(f"invalid temperature bracket {bracket}")

    def dk0(temperature_c: float) -> float:
        return _dk0(crystal, pump_center, temperature_c, qpm_sign)

    f_lo, f_hi = dk0(lo), dk0(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0.0:
        raise PhaseMatchingError(
            "no phase-matching temperature in range",
            {"T_low": lo, "dk0_low": f_lo, "T_high": hi, "dk0_high": f_hi},
        )
    root = bisect(dk0, lo, hi, xtol=1e-12, maxiter=200)
    residual = dk0(root)
    if abs(residual) >= DK0_TOLERANCE:
        raise SolverError(f"degeneracy solve stalled at T={root:.9f} C", residual=residual)
    logger.debug("degenerate temperature %.6f C (dk0=%.3e rad/um)", root, residual)
    return float(root)


def resolve_operating_point(
    crystal: CrystalSpec,
    pump_center: float,
    bracket: Tuple[float, float] = DEFAULT_BRACKET_C,
) -> CrystalSpec:
    """Fill in qpm_sign and, if unset, the degenerate temperature."""
    qpm_sign = resolve_qpm_sign(crystal, pump_center, bracket)
    resolved = crystal.at(qpm_sign=qpm_sign)
    if resolved.temperature_c is None:
        resolved = resolved.at(temperature_c=degenerate_temperature(resolved, pump_center, bracket))
    return resolved


def tuning_curve(
    crystal: CrystalSpec,
    pump_center: float,
    temperatures: Iterable[float],
    relative_span: float = 0.05,
) -> List[TuningPoint]:
    """Collinear signal/idler wavelengths versus temperature.

    Solves Δk(ωs, ωp⁰ − ωs; T) = 0 for ωs within ±relative_span of ωp⁰/2.
    Points without a root in that window carry NaN wavelengths.
    """
    qpm_sign = resolve_qpm_sign(crystal, pump_center)
    half = 0.5 * pump_center
    span = relative_span * half
    points: List[TuningPoint] = []
    for temperature_c in temperatures:

        def along_energy(ws: float) -> float:
            return float(_mismatch(ws, pump_center - ws, crystal, float(temperature_c), qpm_sign))

        root = None
        for lo, hi in ((half, half + span), (half - span, half)):
            if along_energy(lo) * along_energy(hi) <= 0.0:
                root = brentq(along_energy, lo, hi, xtol=1e-12)
                break
        if root is None:
            logger.debug("no collinear solution at %.2f C", temperature_c)
            points.append(TuningPoint(float(temperature_c), float("nan"), float("nan")))
            continue
        points.append(
            TuningPoint(
                temperature_c=float(temperature_c),
                signal_nm=float(omega_to_wavelength(root)),
                idler_nm=float(omega_to_wavelength(pump_center - root)),
            )
        )
    return points
