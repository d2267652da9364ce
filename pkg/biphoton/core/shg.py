"""Singly resonant second-harmonic cavity.

The circulating fundamental power obeys

    Pc = t1·P1 / (1 − √(r1·rm))²,   rm = t²·(1 − γ·Pc)²·r2

and the second harmonic leaving the outcoupler is P2 = 2·γ·Pc²·t2sh.
Conversion depletes the fundamental, so Pc is found as a fixed point.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np
from scipy.optimize import bisect, brentq

from .errors import CalibrationError, OverConversionError, SolverError

logger = logging.getLogger(__name__)

MAX_ITERATIONS = 10_000
CALIBRATION_BRACKET: Tuple[float, float] = (1e-8, 1.0)
CALIBRATION_TOLERANCE_W = 1e-9


@dataclass(frozen=True)
class CavitySpec:
    """Mirror and loss parameters. ``gamma_sh`` is None until calibrated."""

    r1: float = 0.95
    t1: float = 0.05
    r2: float = 0.999
    t2: float = 0.001
    t2sh: float = 0.952
    delta: float = 0.01
    gamma_sh: Optional[float] = None

    def __post_init__(self) -> None:
        for name in ("r1", "t1", "r2", "t2", "t2sh"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.r1 + self.t1 > 1.0 + 1e-12:
            raise ValueError(f"r1 + t1 must not exceed 1, got {self.r1 + self.t1}")
        if self.r2 + self.t2 > 1.0 + 1e-12:
            raise ValueError(f"r2 + t2 must not exceed 1, got {self.r2 + self.t2}")
        if not 0.0 <= self.delta < 1.0:
            raise ValueError(f"delta must lie in [0, 1), got {self.delta}")
        if self.gamma_sh is not None and self.gamma_sh < 0:
            raise ValueError(f"gamma_sh must be non-negative, got {self.gamma_sh}")

    @property
    def transmission(self) -> float:
        """Single-pass intracavity transmission t = 1 − δ."""
        return 1.0 - self.delta

    @property
    def gamma(self) -> float:
        if self.gamma_sh is None:
            raise ValueError("gamma_sh is not set; calibrate it first")
        return self.gamma_sh

    def with_gamma(self, gamma_sh: float) -> "CavitySpec":
        return replace(self, gamma_sh=float(gamma_sh))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "r1": self.r1,
            "t1": self.t1,
            "r2": self.r2,
            "t2": self.t2,
            "t2sh": self.t2sh,
            "delta": self.delta,
            "gamma_sh": self.gamma_sh,
        }


@dataclass(frozen=True)
class ShgOperatingPoint:
    p1: float
    pc: float
    p2: float
    rm: float
    residual: float
    iterations: int = 0
    error: Optional[str] = None

    @property
    def efficiency(self) -> float:
        return self.p2 / self.p1 if self.p1 > 0 else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p1_w": self.p1,
            "pc_w": self.pc,
            "p2_w": self.p2,
            "rm": self.rm,
            "residual_w": self.residual,
            "iterations": self.iterations,
            "efficiency": self.efficiency,
            "error": self.error,
        }


def round_trip_efficiency(pc: float, cavity: CavitySpec) -> float:
    """rm = t²·(1 − γ·Pc)²·r2."""
    if pc < 0:
        raise ValueError(f"circulating power must be non-negative, got {pc}")
    conversion = cavity.gamma * pc
    if conversion >= 1.0:
        raise OverConversionError(f"over-conversion: gamma_sh*Pc = {conversion:.4g} >= 1, model outside validity")
    return cavity.transmission**2 * (1.0 - conversion) ** 2 * cavity.r2


def _enhancement_rhs(pc: float, p1: float, cavity: CavitySpec) -> Tuple[float, float]:
    rm = round_trip_efficiency(pc, cavity)
    return cavity.t1 * p1 / (1.0 - math.sqrt(cavity.r1 * rm)) ** 2, rm


def circulating_power(
    p1: float,
    cavity: CavitySpec,
    damping: float = 0.5,
    max_iterations: int = MAX_ITERATIONS,
) -> ShgOperatingPoint:
    """Damped fixed-point iteration started from the γ = 0 closed form.

    The damping factor is halved whenever the residual grows, which keeps
    the iteration contracting on strongly depleted cavities.
    """
    if p1 < 0:
        raise ValueError(f"input power must be non-negative, got {p1}")
    gamma = cavity.gamma
    if p1 == 0:
        rm = round_trip_efficiency(0.0, cavity)
        return ShgOperatingPoint(p1=0.0, pc=0.0, p2=0.0, rm=rm, residual=0.0)

    linear = cavity.transmission**2 * cavity.r2
    pc = cavity.t1 * p1 / (1.0 - math.sqrt(cavity.r1 * linear)) ** 2
    if gamma * pc >= 1.0:
        pc = 0.5 / gamma

    previous = math.inf
    for iteration in range(1, max_iterations + 1):
        rhs, rm = _enhancement_rhs(pc, p1, cavity)
        residual = rhs - pc
        if abs(residual) <= 1e-12 * max(pc, 1.0):
            break
        if abs(residual) > previous:
            damping = max(damping * 0.5, 1e-3)
        previous = abs(residual)
        pc += damping * residual
    else:
        raise SolverError(
            f"circulating power did not converge after {max_iterations} iterations",
            residual=residual,
            iterations=max_iterations,
        )

    rhs, rm = _enhancement_rhs(pc, p1, cavity)
    residual = rhs - pc
    if abs(residual) >= 1e-9 * max(pc, 1.0):
        raise SolverError("fixed-point residual above tolerance", residual=residual, iterations=iteration)
    p2 = 2.0 * gamma * pc**2 * cavity.t2sh
    return ShgOperatingPoint(p1=float(p1), pc=pc, p2=p2, rm=rm, residual=residual, iterations=iteration)


def sh_output_power(p1: float, cavity: CavitySpec) -> float:
    """P2 = 2·γ·Pc²·t2sh at the converged circulating power."""
    return circulating_power(p1, cavity).p2


def calibrate_gamma(
    p1_ref: float,
    p2_ref: float,
    cavity: CavitySpec,
    bracket: Tuple[float, float] = CALIBRATION_BRACKET,
    scan_points: int = 161,
) -> float:
    """One-point inversion of P2(γ) on its lower, rising branch.

    At fixed P1 the output first grows with γ, peaks when conversion loss
    matches the input coupling, then falls. A log-spaced scan finds the
    first upward crossing of ``p2_ref`` and bisection refines it.
    """
    if not p1_ref > 0 or not p2_ref > 0:
        raise ValueError("calibration powers must be positive")
    lo, hi = bracket
    if not 0 < lo < hi:
        raise ValueError(f"invalid gamma bracket {bracket}")

    def excess(gamma: float) -> float:
        return sh_output_power(p1_ref, cavity.with_gamma(gamma)) - p2_ref

    gammas = np.logspace(math.log10(lo), math.log10(hi), scan_points)
    previous_gamma, previous = float(gammas[0]), excess(float(gammas[0]))
    best = previous
    if previous > 0:
        raise CalibrationError(
            "target below the output at the lower gamma bound",
            {"gamma_low": previous_gamma, "p2_low": previous + p2_ref, "p2_ref": p2_ref},
        )
    for gamma in gammas[1:]:
        current = excess(float(gamma))
        best = max(best, current)
        if current >= 0:
            root = bisect(excess, previous_gamma, float(gamma), xtol=1e-18, rtol=1e-15, maxiter=500)
            miss = excess(root)
            if abs(miss) > CALIBRATION_TOLERANCE_W:
                raise CalibrationError(
                    "calibration bisection missed the target", {"gamma": root, "p2_error_w": miss}
                )
            logger.debug("gamma_sh calibrated to %.9e 1/W on the rising branch", root)
            return float(root)
        previous_gamma, previous = float(gamma), current
    raise CalibrationError(
        "target not reachable on the gamma bracket",
        {"gamma_low": lo, "gamma_high": hi, "p2_max": best + p2_ref, "p2_ref": p2_ref},
    )


def power_curve(p1_values: Iterable[float], cavity: CavitySpec) -> List[ShgOperatingPoint]:
    """Solve each input power independently; failures are kept inline."""
    values = [float(v) for v in p1_values]
    if any(v < 0 for v in values):
        raise ValueError("input powers must be non-negative")
    if any(b < a for a, b in zip(values, values[1:])):
        raise ValueError("input powers must be sorted ascending")
    nan = float("nan")
    curve: List[ShgOperatingPoint] = []
    for p1 in values:
        try:
            curve.append(circulating_power(p1, cavity))
        except SolverError as exc:
            logger.warning("SHG solve failed at P1=%.4f W: %s", p1, exc)
            curve.append(ShgOperatingPoint(p1=p1, pc=nan, p2=nan, rm=nan, residual=nan, error=str(exc)))
    return curve


def input_power_for(p2_target: float, cavity: CavitySpec, p1_max: float = 10.0) -> float:
    """Fundamental power that yields ``p2_target`` of second harmonic."""
    if not p2_target > 0:
        raise ValueError(f"target power must be positive, got {p2_target}")

    def excess(p1: float) -> float:
        return sh_output_power(p1, cavity) - p2_target

    if excess(p1_max) < 0:
        raise CalibrationError("target power above the output at p1_max", {"p1_max_w": p1_max, "p2_target_w": p2_target})
    return float(brentq(excess, 0.0, p1_max, xtol=1e-12))
