"""Joint spectral amplitude of the down-converted pair and its spectral figures of merit."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid
from scipy.optimize import brentq

from .dispersion import C_UM_PER_PS, TWO_PI, ArrayLike, omega_to_wavelength, wavelength_to_omega
from .errors import CalibrationError, KernelTooWideError, NumericalError, SpectrumClippedError
from .phasematch import CrystalSpec, delta_k, taylor_coefficients, taylor_delta_k

logger = logging.getLogger(__name__)

BANDWIDTH_CONVENTIONS = ("amplitude_width", "intensity_fwhm")
PHASE_MATCHING_MODES = ("exact", "taylor")
FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))
MIN_SAMPLES_PER_FWHM = 8
SINC_HALF_MAX = 1.391557377  # x where (sin x / x)^2 = 1/2


@dataclass(frozen=True)
class PumpSpec:
    """cw pump line feeding the down-converter.

    ``bandwidth_convention`` selects how the quoted 3-dB width maps onto
    the Gaussian amplitude width B_p:

    * ``amplitude_width``: B_p is the 3-dB width converted to rad/ps.
    * ``intensity_fwhm``: the 3-dB width is the FWHM of |α|², so
      B_p = FWHM_ω / (2√(2 ln 2)).
    """

    center_wavelength_nm: float = 780.0
    bandwidth_3db_nm: float = 0.05
    power_w: float = 0.742
    bandwidth_convention: str = "amplitude_width"

    def __post_init__(self) -> None:
        if not self.center_wavelength_nm > 0:
            raise ValueError(f"pump wavelength must be positive, got {self.center_wavelength_nm}")
        if not self.bandwidth_3db_nm > 0:
            raise ValueError(f"pump bandwidth must be positive, got {self.bandwidth_3db_nm}")
        if self.power_w < 0:
            raise ValueError(f"pump power must be non-negative, got {self.power_w}")
        if self.bandwidth_convention not in BANDWIDTH_CONVENTIONS:
            raise ValueError(
                f"bandwidth_convention must be one of {BANDWIDTH_CONVENTIONS}, got {self.bandwidth_convention!r}"
            )

    @property
    def center_omega(self) -> float:
        return float(wavelength_to_omega(self.center_wavelength_nm))

    @property
    def bandwidth_omega(self) -> float:
        """3-dB width in rad/ps, 2πcΔλ/λ²."""
        wavelength_um = self.center_wavelength_nm * 1e-3
        return TWO_PI * C_UM_PER_PS * (self.bandwidth_3db_nm * 1e-3) / wavelength_um**2

    @property
    def amplitude_width(self) -> float:
        """B_p in rad/ps."""
        if self.bandwidth_convention == "intensity_fwhm":
            return self.bandwidth_omega / FWHM_PER_SIGMA
        return self.bandwidth_omega

    def to_dict(self) -> Dict[str, Any]:
        return {
            "center_wavelength_nm": self.center_wavelength_nm,
            "bandwidth_3db_nm": self.bandwidth_3db_nm,
            "power_w": self.power_w,
            "bandwidth_convention": self.bandwidth_convention,
            "amplitude_width_rad_per_ps": self.amplitude_width,
        }


@dataclass(frozen=True)
class FrequencyGrid:
    """Shared signal/idler axis: center + (k − N/2)·step, k = 0..N−1."""

    center: float
    half_span: float
    points_per_axis: int = 1024

    def __post_init__(self) -> None:
        if self.points_per_axis < 64 or self.points_per_axis % 2:
            raise ValueError(f"points_per_axis must be even and >= 64, got {self.points_per_axis}")
        if not self.half_span > 0:
            raise ValueError(f"half_span must be positive, got {self.half_span}")
        if not self.center > self.half_span:
            raise ValueError("grid would reach non-positive frequencies")

    @classmethod
    def around_pump(cls, pump: PumpSpec, half_span_nm: float, points_per_axis: int = 1024) -> "FrequencyGrid":
        """Grid centered on ωp⁰/2 spanning ±half_span_nm about the degenerate wavelength."""
        degenerate_nm = 2.0 * pump.center_wavelength_nm
        if not 0 < half_span_nm < degenerate_nm:
            raise ValueError(f"half_span_nm must lie in (0, {degenerate_nm}), got {half_span_nm}")
        short = wavelength_to_omega(degenerate_nm - half_span_nm)
        long_ = wavelength_to_omega(degenerate_nm + half_span_nm)
        return cls(center=0.5 * pump.center_omega, half_span=0.5 * float(short - long_), points_per_axis=points_per_axis)

    @property
    def step(self) -> float:
        return self.half_span / (self.points_per_axis // 2)

    @property
    def axis(self) -> np.ndarray:
        offsets = np.arange(self.points_per_axis) - self.points_per_axis // 2
        return self.center + offsets * self.step

    def to_dict(self) -> Dict[str, Any]:
        return {"center": self.center, "half_span": self.half_span, "points_per_axis": self.points_per_axis}


def _double_integral(values: np.ndarray, step: float) -> float:
    return float(trapezoid(trapezoid(values, dx=step, axis=1), dx=step))


@dataclass(frozen=True, eq=False)
class JsaGrid:
    """Normalized real amplitude A[i, j], i on the signal axis, j on the idler axis."""

    amplitude: np.ndarray
    grid: FrequencyGrid
    pump_center: float
    normalization: float
    warnings: Tuple[str, ...] = ()

    @classmethod
    def from_amplitude(
        cls,
        raw: np.ndarray,
        grid: FrequencyGrid,
        pump_center: float,
        warnings: Sequence[str] = (),
    ) -> "JsaGrid":
        raw = np.asarray(raw, dtype=float)
        n = grid.points_per_axis
        if raw.shape != (n, n):
            raise ValueError(f"amplitude shape {raw.shape} does not match grid ({n}, {n})")
        if not np.all(np.isfinite(raw)):
            raise NumericalError("non-finite joint spectral amplitude", {"points_per_axis": n})
        total = _double_integral(raw**2, grid.step)
        if not total > 0:
            raise NumericalError("joint spectral amplitude vanishes on the grid", grid.to_dict())
        normalization = 1.0 / math.sqrt(total)
        amplitude = raw * normalization
        amplitude.setflags(write=False)
        return cls(amplitude, grid, float(pump_center), normalization, tuple(warnings))

    @property
    def signal_axis(self) -> np.ndarray:
        return self.grid.axis

    @property
    def idler_axis(self) -> np.ndarray:
        return self.grid.axis

    @property
    def step(self) -> float:
        return self.grid.step

    @property
    def density(self) -> np.ndarray:
        return self.amplitude**2

    def total_probability(self) -> float:
        """Trapezoid-rule integral of |A|² over both axes."""
        return _double_integral(self.density, self.step)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Sampled 1-D spectrum on an ascending axis.

    ``domain`` is ``frequency`` (axis in rad/ps) or ``wavelength`` (nm).
    ``is_density`` marks spectra whose values integrate to a probability;
    peak-normalized profiles skip the Jacobian on domain conversion.
    ``offset`` is the coincidence slice's distance from ωp⁰/2 in rad/ps.
    """

    axis: np.ndarray
    values: np.ndarray
    domain: str = "frequency"
    is_density: bool = True
    offset: float = 0.0

    @property
    def unit(self) -> str:
        return "rad/ps" if self.domain == "frequency" else "nm"

    def integral(self) -> float:
        return float(trapezoid(self.values, self.axis))

    def to_wavelength(self) -> "Spectrum":
        if self.domain == "wavelength":
            return self
        wavelength = omega_to_wavelength(self.axis)[::-1]
        values = self.values[::-1]
        if self.is_density:
            # |dω/dλ| with λ in nm
            values = values * TWO_PI * C_UM_PER_PS * 1e-3 / (wavelength * 1e-3) ** 2
        return Spectrum(np.asarray(wavelength), np.asarray(values), "wavelength", self.is_density, self.offset)


@dataclass(frozen=True)
class InstrumentFit:
    rbw_nm: float
    quadrature_rbw_nm: float
    theory_fwhm_nm: float
    target_fwhm_nm: float

    def to_dict(self) -> Dict[str, float]:
        return {
            "rbw_nm": self.rbw_nm,
            "quadrature_rbw_nm": self.quadrature_rbw_nm,
            "theory_fwhm_nm": self.theory_fwhm_nm,
            "target_fwhm_nm": self.target_fwhm_nm,
        }


@dataclass(frozen=True)
class SpectralReport:
    signal_center_nm: float
    idler_center_nm: float
    signal_fwhm_nm: float
    idler_fwhm_nm: float
    coincidence_fwhm_nm: float
    coincidence_offset: float
    entanglement_r: float
    entanglement_r_frequency: float
    schmidt_k: float
    warnings: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        widths = (self.signal_fwhm_nm, self.idler_fwhm_nm, self.coincidence_fwhm_nm)
        if min(widths) <= 0:
            raise NumericalError("non-positive spectral width", {"widths_nm": list(widths)})
        if self.schmidt_k < 1.0 - 1e-6:
            raise NumericalError("Schmidt number below one", {"schmidt_k": self.schmidt_k})

    def to_dict(self) -> Dict[str, Any]:
        return {
            "signal_center_nm": self.signal_center_nm,
            "idler_center_nm": self.idler_center_nm,
            "signal_fwhm_nm": self.signal_fwhm_nm,
            "idler_fwhm_nm": self.idler_fwhm_nm,
            "coincidence_fwhm_nm": self.coincidence_fwhm_nm,
            "coincidence_offset_rad_per_ps": self.coincidence_offset,
            "entanglement_r": self.entanglement_r,
            "entanglement_r_frequency": self.entanglement_r_frequency,
            "schmidt_k": self.schmidt_k,
            "warnings": list(self.warnings),
        }


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------
def pump_envelope(ws: ArrayLike, wi: ArrayLike, pump: PumpSpec) -> ArrayLike:
    detuning = np.asarray(ws, dtype=float) + np.asarray(wi, dtype=float) - pump.center_omega
    return np.exp(-(detuning**2) / (4.0 * pump.amplitude_width**2))


def phase_matching_amplitude(
    ws: ArrayLike,
    wi: ArrayLike,
    crystal: CrystalSpec,
    mode: str = "exact",
    pump_center: Optional[float] = None,
) -> ArrayLike:
    """sin(ΔkL/2)/(Δk/2) in μm, equal to L where |ΔkL/2| < 1e-8.

    Taylor mode expands about ``pump_center``; it defaults to ωs + ωi at
    the middle of the inputs.
    """
    if mode not in PHASE_MATCHING_MODES:
        raise ValueError(f"phase matching mode must be one of {PHASE_MATCHING_MODES}, got {mode!r}")
    if mode == "taylor":
        if pump_center is None:
            pump_center = float(np.median(np.asarray(ws) + np.asarray(wi)))
        dk = np.asarray(taylor_delta_k(ws, wi, taylor_coefficients(crystal, pump_center)))
    else:
        dk = np.asarray(delta_k(ws, wi, crystal))
    length = crystal.length_um
    half_phase = 0.5 * dk * length
    small = np.abs(half_phase) < 1e-8
    safe = np.where(small, 1.0, dk)
    result = np.where(small, length, np.sin(half_phase) / (0.5 * safe))
    return float(result) if result.ndim == 0 else result


def _resolution_warnings(pump: PumpSpec, crystal: CrystalSpec, grid: FrequencyGrid) -> List[str]:
    warnings: List[str] = []
    pump_fwhm = FWHM_PER_SIGMA * pump.amplitude_width
    if pump_fwhm / grid.step < MIN_SAMPLES_PER_FWHM:
        warnings.append(
            f"pump envelope under-resolved: {pump_fwhm / grid.step:.1f} samples per FWHM "
            f"(need {MIN_SAMPLES_PER_FWHM})"
        )
    coeffs = taylor_coefficients(crystal, pump.center_omega)
    slowness = max(abs(coeffs.tau_s), abs(coeffs.tau_i))
    if slowness > 0:
        sinc_fwhm = 4.0 * SINC_HALF_MAX / (slowness * crystal.length_um)
        if sinc_fwhm / grid.step < MIN_SAMPLES_PER_FWHM:
            warnings.append(
                f"phase-matching sinc under-resolved: {sinc_fwhm / grid.step:.1f} samples per FWHM "
                f"(need {MIN_SAMPLES_PER_FWHM})"
            )
    return warnings


def build_jsa(
    pump: PumpSpec,
    crystal: CrystalSpec,
    grid: FrequencyGrid,
    phase_matching: str = "exact",
) -> JsaGrid:
    """Evaluate A = α(ωs + ωi)·Φ_L(ωs, ωi) on the grid and normalize it.

    The crystal must carry a resolved temperature and qpm_sign.
    """
    crystal.operating_point()
    if abs(grid.center - 0.5 * pump.center_omega) > 0.5 * grid.step:
        raise ValueError("frequency grid must be centered on half the pump frequency")
    warnings = _resolution_warnings(pump, crystal, grid)
    for message in warnings:
        logger.warning(message)

    axis = grid.axis
    ws = axis[:, np.newaxis]
    wi = axis[np.newaxis, :]
    raw = pump_envelope(ws, wi, pump) * phase_matching_amplitude(
        ws, wi, crystal, mode=phase_matching, pump_center=pump.center_omega
    )
    jsa = JsaGrid.from_amplitude(raw, grid, pump.center_omega, warnings)
    logger.debug(
        "built %dx%d JSA at T=%.4f C (normalization %.6e)",
        grid.points_per_axis,
        grid.points_per_axis,
        crystal.temperature_c,
        jsa.normalization,
    )
    return jsa


# ---------------------------------------------------------------------------
# Spectra
# ---------------------------------------------------------------------------
def marginal_spectrum(jsa: JsaGrid, which: str = "signal") -> Spectrum:
    """Single-photon spectrum S(ω) = ∫|A|² over the partner frequency."""
    if which == "signal":
        values = trapezoid(jsa.density, dx=jsa.step, axis=1)
        axis = jsa.signal_axis
    elif which == "idler":
        values = trapezoid(jsa.density, dx=jsa.step, axis=0)
        axis = jsa.idler_axis
    else:
        raise ValueError(f"which must be 'signal' or 'idler', got {which!r}")
    return Spectrum(axis, values)


def coincidence_spectrum(jsa: JsaGrid) -> Spectrum:
    """|A(ωs, ωi)|² at the idler line nearest ωp⁰/2, peak-normalized."""
    target = 0.5 * jsa.pump_center
    index = int(np.argmin(np.abs(jsa.idler_axis - target)))
    values = jsa.density[:, index]
    peak = float(values.max())
    if not peak > 0:
        raise NumericalError("empty coincidence slice", {"idler_index": index})
    return Spectrum(jsa.signal_axis, values / peak, is_density=False, offset=float(jsa.idler_axis[index] - target))


def _half_max_crossings(spectrum: Spectrum) -> Tuple[float, float]:
    axis, values = spectrum.axis, spectrum.values
    peak = int(np.argmax(values))
    if peak == 0 or peak == len(values) - 1:
        raise SpectrumClippedError("spectrum maximum sits on the axis edge")
    half = 0.5 * values[peak]

    below_left = np.nonzero(values[:peak] < half)[0]
    below_right = np.nonzero(values[peak:] < half)[0]
    if below_left.size == 0 or below_right.size == 0:
        raise SpectrumClippedError("half-maximum crossing lies outside the axis")
    i = int(below_left[-1])
    j = peak + int(below_right[0])

    def cross(a: int, b: int) -> float:
        return float(axis[a] + (half - values[a]) * (axis[b] - axis[a]) / (values[b] - values[a]))

    return cross(i, i + 1), cross(j - 1, j)


def _width(spectrum: Spectrum, domain: str) -> float:
    lo, hi = _half_max_crossings(spectrum)
    if spectrum.domain == domain:
        return hi - lo
    if domain == "wavelength":
        return float(omega_to_wavelength(lo) - omega_to_wavelength(hi))
    return float(wavelength_to_omega(lo) - wavelength_to_omega(hi))


def fwhm_3db(spectrum: Spectrum) -> float:
    """3-dB width in nm from linearly interpolated half-maximum crossings."""
    return _width(spectrum, "wavelength")


def spectrum_center(spectrum: Spectrum) -> float:
    """Midpoint of the half-maximum crossings, in nm."""
    lo, hi = _half_max_crossings(spectrum)
    if spectrum.domain == "frequency":
        lo, hi = omega_to_wavelength(lo), omega_to_wavelength(hi)
    return float(0.5 * (lo + hi))


def entanglement_parameter(jsa: JsaGrid, domain: str = "wavelength") -> float:
    """R = marginal width / coincidence width."""
    if domain not in ("wavelength", "frequency"):
        raise ValueError(f"domain must be 'wavelength' or 'frequency', got {domain!r}")
    return _width(marginal_spectrum(jsa, "signal"), domain) / _width(coincidence_spectrum(jsa), domain)


def schmidt_spectrum(jsa: JsaGrid) -> np.ndarray:
    """Normalized Schmidt eigenvalues λ_j, descending."""
    try:
        singular = np.linalg.svd(jsa.amplitude * jsa.step, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed: {exc}", jsa.grid.to_dict()) from exc
    weights = singular**2
    return weights / weights.sum()


def schmidt_number(jsa: JsaGrid) -> float:
    weights = schmidt_spectrum(jsa)
    return float(1.0 / np.sum(weights**2))


# ---------------------------------------------------------------------------
# Instrument response
# ---------------------------------------------------------------------------
def convolve_instrument(spectrum: Spectrum, rbw_nm: float) -> Spectrum:
    """Gaussian instrument response of FWHM ``rbw_nm`` on a uniform wavelength axis.

    The spectrum is rebinned onto equal wavelength cells by differencing its
    cumulative integral, then convolved on an axis extended by the kernel
    half-width on both sides. Both steps keep the area.
    """
    if rbw_nm < 0:
        raise ValueError(f"rbw must be non-negative, got {rbw_nm}")
    if rbw_nm == 0:
        return spectrum

    source = spectrum.to_wavelength()
    span = float(source.axis[-1] - source.axis[0])
    if rbw_nm > span:
        raise KernelTooWideError(f"kernel FWHM {rbw_nm} nm exceeds the grid span {span:.4f} nm")
    n = len(source.axis)
    edges = np.linspace(source.axis[0], source.axis[-1], n + 1)
    step = float(edges[1] - edges[0])
    cumulative = cumulative_trapezoid(source.values, source.axis, initial=0.0)
    values = np.diff(np.interp(edges, source.axis, cumulative)) / step
    uniform = 0.5 * (edges[:-1] + edges[1:])

    sigma = rbw_nm / FWHM_PER_SIGMA
    half = max(1, int(math.ceil(4.0 * sigma / step)))
    offsets = np.arange(-half, half + 1) * step
    kernel = np.exp(-0.5 * (offsets / sigma) ** 2)
    kernel /= kernel.sum()

    convolved = np.convolve(values, kernel, mode="full")
    axis = uniform[0] + (np.arange(convolved.size) - half) * step
    return Spectrum(axis, convolved, "wavelength", source.is_density, source.offset)


def fit_instrument_rbw(spectrum: Spectrum, target_fwhm_nm: float) -> InstrumentFit:
    """RBW whose Gaussian response broadens ``spectrum`` to ``target_fwhm_nm``."""
    theory = fwhm_3db(spectrum)
    if not target_fwhm_nm > theory:
        raise CalibrationError(
            "measured width is not broader than the theory width",
            {"theory_fwhm_nm": theory, "target_fwhm_nm": target_fwhm_nm},
        )
    quadrature = math.sqrt(target_fwhm_nm**2 - theory**2)
    source = spectrum.to_wavelength()
    span = float(source.axis[-1] - source.axis[0])

    def excess(rbw: float) -> float:
        return fwhm_3db(convolve_instrument(source, rbw)) - target_fwhm_nm

    upper = min(2.0 * quadrature, span)
    if excess(upper) < 0:
        raise CalibrationError(
            "target width unreachable within the grid span",
            {"rbw_upper_nm": upper, "fwhm_at_upper_nm": excess(upper) + target_fwhm_nm},
        )
    rbw = brentq(excess, 0.0, upper, xtol=1e-9)
    logger.debug("instrument rbw %.6f nm (quadrature estimate %.6f nm)", rbw, quadrature)
    return InstrumentFit(float(rbw), quadrature, theory, float(target_fwhm_nm))


def spectral_report(jsa: JsaGrid) -> SpectralReport:
    signal = marginal_spectrum(jsa, "signal")
    idler = marginal_spectrum(jsa, "idler")
    coincidence = coincidence_spectrum(jsa)
    signal_fwhm = fwhm_3db(signal)
    coincidence_fwhm = fwhm_3db(coincidence)
    return SpectralReport(
        signal_center_nm=spectrum_center(signal),
        idler_center_nm=spectrum_center(idler),
        signal_fwhm_nm=signal_fwhm,
        idler_fwhm_nm=fwhm_3db(idler),
        coincidence_fwhm_nm=coincidence_fwhm,
        coincidence_offset=coincidence.offset,
        entanglement_r=signal_fwhm / coincidence_fwhm,
        entanglement_r_frequency=entanglement_parameter(jsa, "frequency"),
        schmidt_k=schmidt_number(jsa),
        warnings=jsa.warnings,
    )
