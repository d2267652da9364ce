"""Hong–Ou–Mandel overlap and the delay-scanned coincidence dip."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from .errors import DelaySpanError
from .jsa import JsaGrid
from .phasematch import CrystalSpec, taylor_coefficients

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class HomCurve:
    delays: np.ndarray  # ps
    coincidence: np.ndarray
    visibility: float
    dip_center: float  # ps
    dip_fwhm: float  # ps

    def to_dict(self) -> Dict[str, Any]:
        return {
            "visibility": self.visibility,
            "dip_center_ps": self.dip_center,
            "dip_fwhm_ps": self.dip_fwhm,
            "points": int(self.delays.size),
            "delay_span_ps": float(self.delays[-1]),
        }


def _exchange_product(jsa: JsaGrid) -> np.ndarray:
    """A(ωs, ωi)·A(ωi, ωs), normalized by Σ|A|²."""
    amplitude = jsa.amplitude
    return amplitude * amplitude.T / np.sum(amplitude**2)


def overlap_visibility(jsa: JsaGrid) -> float:
    """Magnitude overlap of the amplitude with its exchanged copy."""
    return float(np.sum(np.abs(_exchange_product(jsa))))


def signed_overlap(jsa: JsaGrid) -> float:
    """Same overlap keeping the sign of the side lobes; sets the dip depth."""
    return float(np.sum(_exchange_product(jsa)))


def dip_curve(jsa: JsaGrid, delay_span_ps: float = 6.0, points: int = 1201) -> HomCurve:
    """Normalized coincidence probability C(τ) on linspace(−span, span, points).

    C(τ) = 1 − Σ_k p_k cos(kΔω·τ), where p_k sums the exchange product along
    the diagonal with idler index − signal index = k.
    """
    if not delay_span_ps > 0:
        raise ValueError(f"delay span must be positive, got {delay_span_ps}")
    if points < 3:
        raise ValueError(f"need at least 3 delay points, got {points}")

    product = _exchange_product(jsa)
    n = product.shape[0]
    rows, cols = np.indices(product.shape)
    diagonal = np.bincount((cols - rows).ravel() + n - 1, weights=product.ravel(), minlength=2 * n - 1)
    frequency_offsets = (np.arange(2 * n - 1) - (n - 1)) * jsa.step

    delays = np.linspace(-delay_span_ps, delay_span_ps, points)
    coincidence = 1.0 - np.cos(np.outer(delays, frequency_offsets)) @ diagonal

    lowest = int(np.argmin(coincidence))
    if lowest == 0 or lowest == points - 1:
        raise DelaySpanError(f"dip minimum at the delay-grid edge (span ±{delay_span_ps} ps)")
    visibility = float(np.clip(1.0 - coincidence[lowest], 0.0, 1.0))
    level = 1.0 - 0.5 * visibility

    above_left = np.nonzero(coincidence[:lowest] > level)[0]
    above_right = np.nonzero(coincidence[lowest:] > level)[0]
    if above_left.size == 0 or above_right.size == 0:
        raise DelaySpanError(f"dip half-depth crossing outside ±{delay_span_ps} ps")
    i = int(above_left[-1])
    j = lowest + int(above_right[0])

    def cross(a: int, b: int) -> float:
        ca, cb = coincidence[a], coincidence[b]
        return float(delays[a] + (level - ca) * (delays[b] - delays[a]) / (cb - ca))

    fwhm = cross(j - 1, j) - cross(i, i + 1)
    logger.debug("HOM dip: visibility %.6f, FWHM %.4f ps", visibility, fwhm)
    return HomCurve(delays, coincidence, visibility, float(delays[lowest]), fwhm)


def dip_fwhm_vs_group_delay(crystal: CrystalSpec, pump_center: float) -> float:
    """|tau_s − tau_i|·L in ps, the base width of the triangular cw dip."""
    coeffs = taylor_coefficients(crystal, pump_center)
    return abs(coeffs.tau_s - coeffs.tau_i) * crystal.length_um
