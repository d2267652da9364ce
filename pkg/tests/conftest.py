"""Test configuration and fixtures."""
from typing import Callable

import numpy as np
import pytest

from biphoton.core.config import RunConfig
from biphoton.core.dispersion import AxisCoefficients, OpticalAxis, SellmeierSet
from biphoton.core.jsa import FrequencyGrid, JsaGrid, PumpSpec, build_jsa
from biphoton.core.phasematch import CrystalSpec, resolve_operating_point

# Small analytic grid: ±8 rad/ps around 1200 rad/ps, step 1/16 rad/ps.
FIXTURE_CENTER = 1200.0
FIXTURE_GRID = FrequencyGrid(center=FIXTURE_CENTER, half_span=8.0, points_per_axis=256)


def flat_sellmeier(n0: float) -> SellmeierSet:
    """Dispersionless coefficient set with n ≡ n0 on both axes."""
    coeffs = AxisCoefficients(a=n0 * n0, b=0.0, c=0.0)
    return SellmeierSet(
        name=f"flat-{n0}",
        provenance="constant-index test fixture",
        axes={OpticalAxis.Y: coeffs, OpticalAxis.Z: coeffs},
    )


@pytest.fixture
def constant_index() -> Callable[[float], SellmeierSet]:
    return flat_sellmeier


@pytest.fixture
def make_jsa() -> Callable[..., JsaGrid]:
    """Build a JsaGrid from f(Ωs, Ωi) on the fixture grid (detunings in rad/ps)."""

    def factory(amplitude: Callable[[np.ndarray, np.ndarray], np.ndarray], grid: FrequencyGrid = FIXTURE_GRID) -> JsaGrid:
        detuning = grid.axis - grid.center
        raw = amplitude(detuning[:, np.newaxis], detuning[np.newaxis, :])
        return JsaGrid.from_amplitude(raw, grid, pump_center=2.0 * grid.center)

    return factory


@pytest.fixture
def separable_jsa(make_jsa) -> JsaGrid:
    """Rank-1 product of equal Gaussians, amplitude width 1 rad/ps."""
    return make_jsa(lambda s, i: np.exp(-(s**2) / 4.0) * np.exp(-(i**2) / 4.0))


@pytest.fixture
def symmetric_jsa(make_jsa) -> JsaGrid:
    """Anti-correlated but exchange-symmetric amplitude A = Aᵀ ≥ 0."""
    return make_jsa(lambda s, i: np.exp(-((s + i) ** 2) / (4 * 0.2**2)) * np.exp(-((s - i) ** 2) / (4 * 2.0**2)))


@pytest.fixture
def disjoint_jsa(make_jsa) -> JsaGrid:
    """Signal near +4 rad/ps, idler near −4 rad/ps, no spectral overlap."""
    return make_jsa(lambda s, i: np.exp(-((s - 4.0) ** 2) / (4 * 0.5**2)) * np.exp(-((i + 4.0) ** 2) / (4 * 0.5**2)))


@pytest.fixture(scope="session")
def default_config() -> RunConfig:
    return RunConfig()


@pytest.fixture(scope="session")
def default_pump() -> PumpSpec:
    return PumpSpec()


@pytest.fixture(scope="session")
def resolved_crystal(default_pump) -> CrystalSpec:
    return resolve_operating_point(CrystalSpec(), default_pump.center_omega)


@pytest.fixture(scope="session")
def default_jsa(default_config, default_pump, resolved_crystal) -> JsaGrid:
    """1024² grid at the default operating point, built once per session."""
    return build_jsa(default_pump, resolved_crystal, default_config.frequency_grid())


@pytest.fixture(scope="session")
def small_jsa(default_pump, resolved_crystal) -> JsaGrid:
    """Default physics on a 256² grid spanning ±6 nm."""
    return build_jsa(default_pump, resolved_crystal, FrequencyGrid.around_pump(default_pump, 6.0, 256))
