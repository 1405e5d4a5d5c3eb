"""Velocity distribution, interaction phase, and dispersion bounds."""

import math

import numpy as np
import pytest
from scipy import stats

from counterphase.constants import GRATING_WAVEVECTOR, HBAR
from counterphase.phases import (
    InteractionRegion,
    InterferometerGeometry,
    VelocityDistribution,
    compensated_phase_bound,
    interaction_phase,
    optimal_uncompensated_phase,
    power_law_phase,
    rephasing_frequency,
    sagnac_phase,
    stark_angular_frequency,
)

V0 = 1722.6
SIGMA = 0.04 * V0


def test_distribution_matches_scipy_truncnorm():
    d = VelocityDistribution(V0, SIGMA)
    lo, hi = d.support
    assert lo == pytest.approx(V0 - 5 * SIGMA)
    assert hi == pytest.approx(V0 + 5 * SIGMA)
    ref = stats.truncnorm((lo - V0) / SIGMA, (hi - V0) / SIGMA, loc=V0, scale=SIGMA)
    v = np.linspace(lo, hi, 101)
    assert np.allclose(d.pdf(v), ref.pdf(v), rtol=1e-12)


def test_distribution_zero_outside_support():
    d = VelocityDistribution(V0, SIGMA)
    lo, hi = d.support
    assert d.pdf(lo - 1.0) == 0.0
    assert d.pdf(hi + 1.0) == 0.0
    v = np.linspace(lo, hi, 20001)
    assert np.trapezoid(d.pdf(v), v) == pytest.approx(1.0, abs=1e-9)


def test_distribution_sigma_ratio_and_validation():
    assert VelocityDistribution(V0, SIGMA).sigma_ratio == pytest.approx(0.04)
    with pytest.raises(ValueError):
        VelocityDistribution(0.0, SIGMA)
    with pytest.raises(ValueError):
        VelocityDistribution(V0, -1.0)
    with pytest.raises(ValueError):
        VelocityDistribution(V0, SIGMA, trunc_k=2.0)
    # support must stay positive: wide slow beams are rejected
    with pytest.raises(ValueError):
        VelocityDistribution(100.0, 30.0)


def test_stark_angular_frequency():
    # 0.5 * alpha * (V/d)^2 / hbar against a hand evaluation
    alpha, volts, gap = 2.68e-39, 368.0, 2e-3
    w = stark_angular_frequency(volts, gap, alpha)
    assert w == pytest.approx(0.5 * alpha * (volts / gap) ** 2 / HBAR, rel=1e-15)
    assert w == pytest.approx(430193.93528890406, rel=1e-12)


def test_interaction_phase_scales_as_inverse_speed():
    w = 430193.93528890406
    phi0 = interaction_phase(V0, w, 0.1)
    assert phi0 == pytest.approx(24.97352463072705, rel=1e-12)
    assert interaction_phase(2 * V0, w, 0.1) == pytest.approx(phi0 / 2, rel=1e-12)
    v = np.array([V0, 2 * V0])
    assert interaction_phase(v, w, 0.1)[1] == pytest.approx(phi0 / 2, rel=1e-12)
    with pytest.raises(ValueError):
        interaction_phase(0.0, w, 0.1)


def test_interaction_region_omega():
    region = InteractionRegion(voltage=368.0, gap=2e-3, length=0.1, alpha=2.68e-39)
    assert region.omega_int() == pytest.approx(430193.93528890406, rel=1e-12)
    with pytest.raises(ValueError):
        InteractionRegion(voltage=368.0, gap=0.0, length=0.1, alpha=2.68e-39)


def test_power_law_phase():
    v = np.array([V0 / 2, V0, 2 * V0])
    # n = -1 is the interaction-phase shape, n = +1 the Sagnac shape
    assert power_law_phase(v, 10.0, V0, -1)[0] == pytest.approx(20.0)
    assert power_law_phase(v, 10.0, V0, 1)[2] == pytest.approx(20.0)
    assert power_law_phase(V0, 10.0, V0, -3) == pytest.approx(10.0)


def test_dispersion_phase_limits():
    # first-order phase spread reaches 1 rad at |1/n| * v0/sigma
    assert optimal_uncompensated_phase(-3, V0, SIGMA) == pytest.approx(25.0 / 3)
    assert optimal_uncompensated_phase(1, V0, SIGMA) == pytest.approx(25.0)
    # residual curvature after compensation relaxes that by v0/sigma/(n+1)
    assert compensated_phase_bound(-3, V0, SIGMA) == pytest.approx(625.0 / 6)
    assert compensated_phase_bound(2, V0, SIGMA) == pytest.approx(625.0 / 6)
    # n = -1 has no curvature term: compensation is exact
    assert compensated_phase_bound(-1, V0, SIGMA) == math.inf
    with pytest.raises(ValueError):
        optimal_uncompensated_phase(0, V0, SIGMA)
    with pytest.raises(ValueError):
        compensated_phase_bound(0, V0, SIGMA)


def test_sagnac_phase():
    phi = sagnac_phase(V0, 7.29e-5, GRATING_WAVEVECTOR, 0.66)
    hand = 2 * GRATING_WAVEVECTOR * 0.66**2 * 7.29e-5 / V0
    assert phi == pytest.approx(hand, rel=1e-15)
    assert phi == pytest.approx(2.3165454242884187, rel=1e-12)
    # proportional to v, unlike the 1/v interaction phase
    assert sagnac_phase(2 * V0, 7.29e-5, GRATING_WAVEVECTOR, 0.66) == pytest.approx(
        phi / 2, rel=1e-14
    )


def test_rephasing_frequency():
    f = rephasing_frequency(430193.93528890406, 0.1, 1.0)
    assert f == pytest.approx(6846.749128938404, rel=1e-12)
    # definition: 2*pi*f*L_shifters equals omega_int*L_int
    assert 2 * math.pi * f * 1.0 == pytest.approx(430193.93528890406 * 0.1, rel=1e-14)


def test_geometry_validation():
    g = InterferometerGeometry(l_shifters=1.0, l_g=0.66)
    assert g.k_g == GRATING_WAVEVECTOR
    with pytest.raises(ValueError):
        InterferometerGeometry(l_shifters=-1.0, l_g=0.66)
