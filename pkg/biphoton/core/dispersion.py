"""Temperature-dependent KTP refractive indices and propagation constants.

Wavelengths are given in nm at the public API and converted to μm for the
Sellmeier polynomials. Angular frequencies are in rad/ps, wavenumbers in
rad/μm, so c is expressed in μm/ps.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Mapping, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.constants import c as _C_SI

from .errors import ConfigError, DispersionRangeError

logger = logging.getLogger(__name__)

C_UM_PER_PS = _C_SI * 1e-6
TWO_PI = 2.0 * np.pi
DEFAULT_STEP = 1e-4  # rad/ps

ArrayLike = Union[float, np.ndarray]


class OpticalAxis(str, Enum):
    """Principal crystal axes carrying the interacting fields."""

    Y = "Y"
    Z = "Z"

    @classmethod
    def parse(cls, label: Any, field: str = "axis") -> "OpticalAxis":
        if isinstance(label, cls):
            return label
        try:
            return cls(str(label).strip().upper())
        except ValueError:
            raise ConfigError(field, f"unknown optical axis {label!r} (expected Y or Z)") from None


@dataclass(frozen=True)
class AxisCoefficients:
    """Two-pole Sellmeier polynomial with a thermo-optic correction.

    n²(λ) = a + b/(1 − c/λ²) + d/(1 − e/λ²) − f·λ²        (λ in μm)
    Δn(λ, ΔT) = n1(λ)·ΔT + n2(λ)·ΔT²,  n_j(λ) = Σ_m coeff[m] / λ^m
    """

    a: float
    b: float
    c: float
    d: float = 0.0
    e: float = 0.0
    f: float = 0.0
    thermo_linear: Tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    thermo_quadratic: Tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def room_index(self, wavelength_um: np.ndarray) -> np.ndarray:
        wl2 = wavelength_um * wavelength_um
        n2 = self.a + self.b / (1.0 - self.c / wl2) + self.d / (1.0 - self.e / wl2) - self.f * wl2
        return np.sqrt(n2)

    def thermo_correction(self, wavelength_um: np.ndarray, delta_t: ArrayLike) -> np.ndarray:
        inv = 1.0 / wavelength_um
        n1 = P.polyval(inv, self.thermo_linear)
        n2 = P.polyval(inv, self.thermo_quadratic)
        return n1 * delta_t + n2 * delta_t * delta_t

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], field: str) -> "AxisCoefficients":
        if not isinstance(data, Mapping):
            raise ConfigError(field, "must be a mapping")
        known = {"a", "b", "c", "d", "e", "f", "thermo_linear", "thermo_quadratic"}
        for key in data:
            if key not in known:
                raise ConfigError(f"{field}.{key}", "unknown key")
        values: Dict[str, Any] = {}
        for key in ("a", "b", "c"):
            if key not in data:
                raise ConfigError(f"{field}.{key}", "missing required coefficient")
        for key in ("a", "b", "c", "d", "e", "f"):
            if key in data:
                values[key] = _number(data[key], f"{field}.{key}")
        for key in ("thermo_linear", "thermo_quadratic"):
            if key in data:
                seq = data[key]
                if not isinstance(seq, (list, tuple)) or len(seq) != 4:
                    raise ConfigError(f"{field}.{key}", "expected a list of 4 numbers")
                values[key] = tuple(_number(v, f"{field}.{key}[{i}]") for i, v in enumerate(seq))
        return cls(**values)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "a": self.a,
            "b": self.b,
            "c": self.c,
            "d": self.d,
            "e": self.e,
            "f": self.f,
            "thermo_linear": list(self.thermo_linear),
            "thermo_quadratic": list(self.thermo_quadratic),
        }


@dataclass(frozen=True)
class SellmeierSet:
    """Versioned per-axis coefficient data with its validity window."""

    name: str
    provenance: str
    axes: Mapping[OpticalAxis, AxisCoefficients]
    wavelength_range_um: Tuple[float, float] = (0.4, 3.5)
    temperature_range_c: Tuple[float, float] = (0.0, 200.0)
    reference_temperature_c: float = 25.0

    def __post_init__(self) -> None:
        if not self.provenance or not self.provenance.strip():
            raise ValueError("SellmeierSet provenance must be a non-empty citation string")
        lo, hi = self.wavelength_range_um
        if not 0 < lo < hi:
            raise ValueError(f"invalid wavelength window {self.wavelength_range_um}")
        t_lo, t_hi = self.temperature_range_c
        if not t_lo < t_hi:
            raise ValueError(f"invalid temperature window {self.temperature_range_c}")

    def coefficients(self, axis: OpticalAxis) -> AxisCoefficients:
        try:
            return self.axes[axis]
        except KeyError:
            raise ValueError(f"coefficient set {self.name!r} has no data for axis {axis.value}") from None

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], field: str = "sellmeier") -> "SellmeierSet":
        if not isinstance(data, Mapping):
            raise ConfigError(field, "must be a mapping")
        known = {
            "name",
            "provenance",
            "axes",
            "wavelength_range_um",
            "temperature_range_c",
            "reference_temperature_c",
        }
        for key in data:
            if key not in known:
                raise ConfigError(f"{field}.{key}", "unknown key")
        provenance = data.get("provenance")
        if not isinstance(provenance, str) or not provenance.strip():
            raise ConfigError(f"{field}.provenance", "must be a non-empty citation string")
        raw_axes = data.get("axes")
        if not isinstance(raw_axes, Mapping) or not raw_axes:
            raise ConfigError(f"{field}.axes", "must map axis labels to coefficients")
        axes = {
            OpticalAxis.parse(label, f"{field}.axes.{label}"): AxisCoefficients.from_dict(
                coeffs, f"{field}.axes.{label}"
            )
            for label, coeffs in raw_axes.items()
        }
        kwargs: Dict[str, Any] = {
            "name": str(data.get("name", "override")),
            "provenance": provenance,
            "axes": axes,
        }
        for key in ("wavelength_range_um", "temperature_range_c"):
            if key in data:
                pair = data[key]
                if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                    raise ConfigError(f"{field}.{key}", "expected [low, high]")
                kwargs[key] = (_number(pair[0], f"{field}.{key}[0]"), _number(pair[1], f"{field}.{key}[1]"))
        if "reference_temperature_c" in data:
            kwargs["reference_temperature_c"] = _number(
                data["reference_temperature_c"], f"{field}.reference_temperature_c"
            )
        try:
            return cls(**kwargs)
        except ValueError as exc:
            raise ConfigError(field, str(exc)) from None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "provenance": self.provenance,
            "wavelength_range_um": list(self.wavelength_range_um),
            "temperature_range_c": list(self.temperature_range_c),
            "reference_temperature_c": self.reference_temperature_c,
            "axes": {axis.value: coeffs.to_dict() for axis, coeffs in sorted(self.axes.items())},
        }


def _number(value: Any, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(field, f"expected a number, got {value!r}")
    return float(value)


KTP_SELLMEIER = SellmeierSet(
    name="ktp-2004",
    provenance=(
        "n_y: Konig & Wong, Appl. Phys. Lett. 84, 1644 (2004), refit of Fan et al., "
        "Appl. Opt. 26, 2390 (1987); n_z: Fradkin et al., Appl. Phys. Lett. 74, 914 (1999); "
        "thermo-optic: Emanueli & Arie, Appl. Opt. 42, 6661 (2003)"
    ),
    axes={
        OpticalAxis.Y: AxisCoefficients(
            a=2.09930,
            b=0.922683,
            c=0.0467695,
            f=0.0138408,
            thermo_linear=(6.2897e-6, 6.3061e-6, -6.0629e-6, 2.6486e-6),
            thermo_quadratic=(-0.14445e-8, 2.2244e-8, -3.5770e-8, 1.3470e-8),
        ),
        OpticalAxis.Z: AxisCoefficients(
            a=2.12725,
            b=1.18431,
            c=5.14852e-2,
            d=0.6603,
            e=100.00507,
            f=9.68956e-3,
            thermo_linear=(9.9587e-6, 9.9228e-6, -8.9603e-6, 4.1010e-6),
            thermo_quadratic=(-1.1882e-8, 10.459e-8, -9.8136e-8, 3.1481e-8),
        ),
    },
)


# ---------------------------------------------------------------------------
# Unit helpers
# ---------------------------------------------------------------------------
def wavelength_to_omega(wavelength_nm: ArrayLike) -> ArrayLike:
    """Vacuum wavelength [nm] -> angular frequency [rad/ps]."""
    return _scalar_or_array(TWO_PI * C_UM_PER_PS / (np.asarray(wavelength_nm, dtype=float) * 1e-3))


def omega_to_wavelength(omega: ArrayLike) -> ArrayLike:
    """Angular frequency [rad/ps] -> vacuum wavelength [nm]."""
    return _scalar_or_array(TWO_PI * C_UM_PER_PS / np.asarray(omega, dtype=float) * 1e3)


def _scalar_or_array(values: np.ndarray) -> ArrayLike:
    return float(values) if np.ndim(values) == 0 else values


def _check_window(name: str, values: np.ndarray, window: Tuple[float, float], scale: float = 1.0) -> None:
    lo, hi = window
    if not np.all(np.isfinite(values)):
        raise DispersionRangeError(name, values, (lo * scale, hi * scale))
    low, high = float(np.min(values)), float(np.max(values))
    if low < lo or high > hi:
        bad = low if low < lo else high
        raise DispersionRangeError(name, bad * scale, (lo * scale, hi * scale))


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------
def refractive_index(
    axis: OpticalAxis | str,
    wavelength_nm: ArrayLike,
    temperature_c: ArrayLike,
    sellmeier: SellmeierSet = KTP_SELLMEIER,
) -> ArrayLike:
    """n(λ, T) = n_room(λ) + Δn(λ, T) for one principal axis."""
    axis = OpticalAxis.parse(axis)
    wl_um = np.asarray(wavelength_nm, dtype=float) * 1e-3
    temp = np.asarray(temperature_c, dtype=float)
    _check_window("wavelength_nm", wl_um, sellmeier.wavelength_range_um, scale=1e3)
    _check_window("temperature_c", temp, sellmeier.temperature_range_c)
    coeffs = sellmeier.coefficients(axis)
    delta_t = temp - sellmeier.reference_temperature_c
    return _scalar_or_array(coeffs.room_index(wl_um) + coeffs.thermo_correction(wl_um, delta_t))


def thermo_optic_correction(
    axis: OpticalAxis | str,
    wavelength_nm: ArrayLike,
    temperature_c: ArrayLike,
    sellmeier: SellmeierSet = KTP_SELLMEIER,
) -> ArrayLike:
    """The Δn(λ, T) term alone; zero at the set's reference temperature."""
    axis = OpticalAxis.parse(axis)
    wl_um = np.asarray(wavelength_nm, dtype=float) * 1e-3
    temp = np.asarray(temperature_c, dtype=float)
    _check_window("wavelength_nm", wl_um, sellmeier.wavelength_range_um, scale=1e3)
    _check_window("temperature_c", temp, sellmeier.temperature_range_c)
    delta_t = temp - sellmeier.reference_temperature_c
    return _scalar_or_array(sellmeier.coefficients(axis).thermo_correction(wl_um, delta_t))


def propagation_constant(
    axis: OpticalAxis | str,
    omega: ArrayLike,
    temperature_c: ArrayLike,
    sellmeier: SellmeierSet = KTP_SELLMEIER,
) -> ArrayLike:
    """k = n(λ(ω), T)·ω/c in rad/μm."""
    w = np.asarray(omega, dtype=float)
    if not np.all(w > 0):
        raise DispersionRangeError("angular_frequency", float(np.min(w)), (0.0, float("inf")))
    n = refractive_index(axis, omega_to_wavelength(w), temperature_c, sellmeier)
    return _scalar_or_array(np.asarray(n) * w / C_UM_PER_PS)


def group_derivative(
    axis: OpticalAxis | str,
    omega: ArrayLike,
    temperature_c: ArrayLike,
    sellmeier: SellmeierSet = KTP_SELLMEIER,
    step: float = DEFAULT_STEP,
) -> ArrayLike:
    """dk/dω [ps/μm] by central difference; the group slowness 1/v_g."""
    if step <= 0:
        raise ValueError("finite-difference step must be positive")
    w = np.asarray(omega, dtype=float)
    upper = np.asarray(propagation_constant(axis, w + step, temperature_c, sellmeier))
    lower = np.asarray(propagation_constant(axis, w - step, temperature_c, sellmeier))
    return _scalar_or_array((upper - lower) / (2.0 * step))
