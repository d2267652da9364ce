"""biphoton - simulator of a 1560 nm frequency anti-correlated photon-pair source."""

from .core.config import RunConfig, parse_config
from .core.errors import BiphotonError
from .core.jsa import JsaGrid, PumpSpec, build_jsa, spectral_report
from .core.phasematch import CrystalSpec, degenerate_temperature
from .core.shg import CavitySpec, calibrate_gamma

__version__ = "0.3.0"
__all__ = [
    "BiphotonError",
    "CavitySpec",
    "CrystalSpec",
    "JsaGrid",
    "PumpSpec",
    "RunConfig",
    "build_jsa",
    "calibrate_gamma",
    "degenerate_temperature",
    "parse_config",
    "spectral_report",
]
