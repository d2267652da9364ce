import math

import numpy as np
import pytest

from biphoton.core.errors import DelaySpanError
from biphoton.core.hom import dip_curve, dip_fwhm_vs_group_delay, overlap_visibility, signed_overlap
from biphoton.core.phasematch import TYPE_I_ZZZ, CrystalSpec

pytestmark = pytest.mark.unit


@pytest.fixture
def flipped_lobe_jsa(make_jsa):
    """Symmetric fixture with the (Ωs > 1, Ωi < −1) corner sign-flipped."""

    def amplitude(s, i):
        base = np.exp(-((s + i) ** 2) / (4 * 0.2**2)) * np.exp(-((s - i) ** 2) / (4 * 2.0**2))
        return np.where((s > 1.0) & (i < -1.0), -base, base)

    return make_jsa(amplitude)


def test_symmetric_fixture_overlaps_perfectly(symmetric_jsa, separable_jsa):
    for jsa in (symmetric_jsa, separable_jsa):
        assert overlap_visibility(jsa) == pytest.approx(1.0, abs=1e-9)
        assert signed_overlap(jsa) == pytest.approx(overlap_visibility(jsa), abs=1e-12)


def test_disjoint_fixture_has_no_overlap(disjoint_jsa):
    assert overlap_visibility(disjoint_jsa) < 1e-6


def test_flipped_lobe_lowers_signed_overlap(flipped_lobe_jsa):
    magnitude = overlap_visibility(flipped_lobe_jsa)
    signed = signed_overlap(flipped_lobe_jsa)
    assert signed < magnitude
    assert 0.0 <= magnitude <= 1.0 + 1e-12
    assert magnitude >= abs(signed)


def test_symmetric_dip_reaches_zero(symmetric_jsa):
    curve = dip_curve(symmetric_jsa)
    assert curve.coincidence.min() == pytest.approx(0.0, abs=1e-9)
    assert curve.visibility == pytest.approx(1.0, abs=1e-9)
    assert curve.dip_center == pytest.approx(0.0, abs=1e-12)
    # difference-frequency density is Gaussian with σ = 2 rad/ps: C(τ) = 1 − exp(−2τ²)
    assert curve.dip_fwhm == pytest.approx(2.0 * math.sqrt(math.log(2.0) / 2.0), rel=1e-2)


def test_dip_curve_properties(small_jsa, flipped_lobe_jsa):
    assert np.allclose(dip_curve(flipped_lobe_jsa).coincidence, dip_curve(flipped_lobe_jsa).coincidence[::-1], atol=1e-6)

    curve = dip_curve(small_jsa)
    assert np.allclose(curve.coincidence, curve.coincidence[::-1], atol=1e-6)
    assert curve.coincidence.min() == pytest.approx(1.0 - signed_overlap(small_jsa), abs=1e-6)
    assert curve.dip_center == pytest.approx(0.0, abs=1e-12)
    assert np.all(curve.coincidence >= 0.0)
    assert np.all(curve.coincidence <= 1.0 + 1e-6)
    assert 0.0 <= curve.visibility <= 1.0


def test_span_too_small_raises(symmetric_jsa):
    with pytest.raises(DelaySpanError):
        dip_curve(symmetric_jsa, delay_span_ps=0.1, points=21)
    with pytest.raises(ValueError):
        dip_curve(symmetric_jsa, delay_span_ps=-1.0)
    with pytest.raises(ValueError):
        dip_curve(symmetric_jsa, points=2)


def test_hom_curve_summary(symmetric_jsa):
    data = dip_curve(symmetric_jsa, delay_span_ps=4.0, points=401).to_dict()
    assert data["points"] == 401
    assert data["delay_span_ps"] == 4.0
    assert set(data) == {"visibility", "dip_center_ps", "dip_fwhm_ps", "points", "delay_span_ps"}


def test_group_delay_estimate_scales_with_length(resolved_crystal, default_pump):
    longer = CrystalSpec(length_mm=20.0, temperature_c=resolved_crystal.temperature_c, qpm_sign=1)
    base = dip_fwhm_vs_group_delay(resolved_crystal, default_pump.center_omega)
    assert base == pytest.approx(2.955, rel=1e-2)
    assert dip_fwhm_vs_group_delay(longer, default_pump.center_omega) == pytest.approx(2.0 * base, rel=1e-15)


def test_group_delay_estimate_vanishes_for_type_i(default_pump):
    crystal = CrystalSpec(
        poling_period_um=24.925, axes=TYPE_I_ZZZ, interaction="type-I", temperature_c=40.0, qpm_sign=-1
    )
    assert dip_fwhm_vs_group_delay(crystal, default_pump.center_omega) == 0.0


@pytest.mark.slow
def test_default_dip(default_jsa, resolved_crystal, default_pump):
    curve = dip_curve(default_jsa)
    visibility = overlap_visibility(default_jsa)
    assert visibility >= 0.99
    assert abs(visibility - signed_overlap(default_jsa)) < 1e-2
    assert curve.visibility >= 0.99
    assert curve.dip_fwhm == pytest.approx(1.48, rel=0.10)
    assert curve.coincidence.min() == pytest.approx(1.0 - signed_overlap(default_jsa), abs=1e-6)

    estimate = dip_fwhm_vs_group_delay(resolved_crystal, default_pump.center_omega)
    assert 0.5 * curve.dip_fwhm <= estimate <= 2.0 * curve.dip_fwhm


@pytest.mark.slow
def test_default_dip_baseline_and_refinement(default_jsa):
    wide = dip_curve(default_jsa, delay_span_ps=50.0, points=2001)
    assert wide.coincidence[0] == pytest.approx(1.0, abs=1e-3)
    assert wide.coincidence[-1] == pytest.approx(1.0, abs=1e-3)

    coarse = dip_curve(default_jsa, points=1201)
    fine = dip_curve(default_jsa, points=2401)
    assert fine.visibility == pytest.approx(coarse.visibility, rel=1e-3)
    assert fine.dip_fwhm == pytest.approx(coarse.dip_fwhm, rel=1e-3)
