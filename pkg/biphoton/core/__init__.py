"""Physics and configuration modules for the photon-pair simulator."""

from .config import RunConfig, parse_config
from .dispersion import KTP_SELLMEIER, OpticalAxis, SellmeierSet
from .hom import HomCurve, dip_curve, overlap_visibility, signed_overlap
from .jsa import FrequencyGrid, JsaGrid, PumpSpec, Spectrum, build_jsa
from .phasematch import AxisAssignment, CrystalSpec, TaylorCoefficients
from .shg import CavitySpec, ShgOperatingPoint

__all__ = [
    "AxisAssignment",
    "CavitySpec",
    "CrystalSpec",
    "FrequencyGrid",
    "HomCurve",
    "JsaGrid",
    "KTP_SELLMEIER",
    "OpticalAxis",
    "PumpSpec",
    "RunConfig",
    "SellmeierSet",
    "ShgOperatingPoint",
    "Spectrum",
    "TaylorCoefficients",
    "build_jsa",
    "dip_curve",
    "overlap_visibility",
    "parse_config",
    "signed_overlap",
]
