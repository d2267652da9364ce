"""Exception hierarchy shared by the simulator modules and the CLI."""
from __future__ import annotations

from typing import Any, Dict, Optional, Tuple


class BiphotonError(Exception):
    """Base class for every error raised by the simulator."""


class ConfigError(BiphotonError, ValueError):
    """Invalid configuration document; ``field`` is a dotted path."""

    def __init__(self, field: str, message: str, offset: Optional[int] = None) -> None:
        self.field = field
        self.offset = offset
        where = field or "<root>"
        if offset is not None:
            where = f"{where} (byte {offset})"
        super().__init__(f"{where}: {message}")


class DispersionRangeError(BiphotonError, ValueError):
    """A wavelength or temperature left the coefficient validity window."""

    def __init__(self, parameter: str, value: Any, window: Tuple[float, float]) -> None:
        self.parameter = parameter
        self.value = value
        self.window = window
        super().__init__(
            f"{parameter}={value} outside validity window [{window[0]}, {window[1]}]"
        )


class PhaseMatchingError(BiphotonError, RuntimeError):
    """No phase-matching temperature inside the search bracket."""

    def __init__(self, message: str, endpoints: Dict[str, float]) -> None:
        self.endpoints = endpoints
        detail = ", ".join(f"{k}={v:.6g}" for k, v in endpoints.items())
        super().__init__(f"{message} ({detail})")


class SolverError(BiphotonError, RuntimeError):
    """An iterative solve did not converge."""

    def __init__(self, message: str, residual: Optional[float] = None, iterations: Optional[int] = None) -> None:
        self.residual = residual
        self.iterations = iterations
        super().__init__(message)


class OverConversionError(SolverError):
    """gamma_sh * Pc reached unity; the round-trip loss model no longer applies."""


class CalibrationError(SolverError):
    """The calibration target is not reachable on the gamma bracket."""

    def __init__(self, message: str, endpoints: Dict[str, float]) -> None:
        self.endpoints = endpoints
        detail = ", ".join(f"{k}={v:.6g}" for k, v in endpoints.items())
        super().__init__(f"{message} ({detail})")


class SpectrumClippedError(BiphotonError, ValueError):
    """The half-maximum crossing of a spectrum lies outside its axis."""


class KernelTooWideError(BiphotonError, ValueError):
    """Instrument kernel is wider than the spectrum's axis span."""


class DelaySpanError(BiphotonError, ValueError):
    """HOM delay grid does not contain the dip."""


class NumericalError(BiphotonError, RuntimeError):
    """Internal numerical failure (non-finite values, SVD breakdown)."""

    def __init__(self, message: str, metadata: Optional[Dict[str, Any]] = None) -> None:
        self.metadata = metadata or {}
        super().__init__(message)
