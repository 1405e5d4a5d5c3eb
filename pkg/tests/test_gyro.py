"""Rotation-rate servo: conversions, profiles, closed-loop behavior."""

import math

import numpy as np
import pytest

from counterphase.constants import GRATING_WAVEVECTOR
from counterphase.errors import ServoDivergenceError
from counterphase.gyro import (
    RotationProfile,
    ServoState,
    default_gain,
    frequency_to_rotation,
    rotation_to_frequency,
    run_servo,
)
from counterphase.scenario import build_scenario

EARTH = 7.29e-5


def test_rotation_frequency_conversion():
    f = rotation_to_frequency(EARTH, GRATING_WAVEVECTOR, 0.66, 1.0)
    assert f == pytest.approx(635.1048, rel=1e-12)
    assert frequency_to_rotation(f, GRATING_WAVEVECTOR, 0.66, 1.0) == pytest.approx(
        EARTH, rel=1e-14
    )
    # the pair cancels the Sagnac phase when 2*pi*f*L/v = 2*k*Lg^2*Omega/v
    lhs = 2 * math.pi * f * 1.0
    rhs = 2 * GRATING_WAVEVECTOR * 0.66**2 * EARTH
    assert lhs == pytest.approx(rhs, rel=1e-14)


def test_default_gain():
    # halves the frequency error each step: 0.5 / (phase per Hz)
    assert default_gain(1722.6, 1.0) == pytest.approx(
        0.5 * 1722.6 / (2 * math.pi), rel=1e-14
    )


def test_rotation_profiles():
    c = RotationProfile.constant(EARTH, 60.0)
    assert c.t_span == (0.0, 60.0)
    assert c.rate_at(31.4) == pytest.approx(EARTH)
    assert c.integral() == pytest.approx(EARTH * 60.0, rel=1e-12)
    r = RotationProfile.ramp(0.0, 2e-4, 10.0)
    assert r.rate_at(5.0) == pytest.approx(1e-4)
    assert r.integral() == pytest.approx(1e-3, rel=1e-12)
    with pytest.raises(ValueError):
        RotationProfile(times=np.array([0.0, 1.0]), rates=np.array([1.0]))


def test_servo_state_validation():
    ServoState(f=0.0, gain=1.0, dt=1e-3)
    with pytest.raises(ValueError):
        ServoState(f=0.0, gain=0.0, dt=1e-3)
    with pytest.raises(ValueError):
        ServoState(f=0.0, gain=1.0, dt=0.0)


def test_servo_locks_onto_constant_rotation():
    sc = build_scenario({"detection": {"noise": False}})
    target = rotation_to_frequency(EARTH, sc.geometry.k_g, 0.66, 1.0)
    profile = RotationProfile.constant(EARTH, 0.05)
    state = ServoState(f=0.0, gain=default_gain(sc.beam.v0, 1.0), dt=1e-3)
    tel = run_servo(profile, state, sc)
    assert len(tel.t) == 51  # initial row plus one per interval
    assert tel.f[0] == 0.0
    assert tel.f[-1] == pytest.approx(target, rel=1e-12)
    # residual decays geometrically once captured
    assert abs(tel.residual[-1]) < 1e-10
    # integrated angle tracks omega*t up to the capture transient
    assert tel.theta[-1] == pytest.approx(EARTH * 0.05, rel=0.05)


def test_servo_divergence_detection():
    sc = build_scenario({"detection": {"noise": False}})
    # rotation ramps up but the loop is far too weak to follow, so the
    # uncompensated residual grows every interval
    profile = RotationProfile.ramp(0.0, 8e-5, 0.02)
    state = ServoState(f=0.0, gain=1e-6, dt=1e-3)
    with pytest.raises(ServoDivergenceError) as err:
        run_servo(profile, state, sc)
    assert err.value.step == 10
    assert abs(err.value.residual) > 1.0


def test_servo_telemetry_csv(tmp_path):
    sc = build_scenario({"detection": {"noise": False}})
    profile = RotationProfile.constant(EARTH, 0.01)
    state = ServoState(f=0.0, gain=default_gain(sc.beam.v0, 1.0), dt=1e-3)
    tel = run_servo(profile, state, sc)
    path = tmp_path / "servo.csv"
    tel.to_csv(path, header_lines=["# demo"])
    lines = path.read_text().splitlines()
    assert lines[0] == "# demo"
    assert lines[1] == "t_s,omega_in_rad_s,f_hz,residual_rad,theta_rad"
    assert len(lines) == 2 + len(tel.t)


def test_servo_with_noise_stays_captured():
    # 1 s updates collect enough counts for a usable phase fit
    sc = build_scenario({})
    assert sc.detection.noise
    target = rotation_to_frequency(EARTH, sc.geometry.k_g, 0.66, 1.0)
    profile = RotationProfile.constant(EARTH, 20.0)
    state = ServoState(f=target, gain=default_gain(sc.beam.v0, 1.0), dt=1.0)
    tel = run_servo(profile, state, sc)
    # shot noise keeps it rattling around the lock point, not walking off
    assert abs(tel.f[-1] / target - 1) < 0.5
    assert np.all(np.abs(tel.residual) < math.pi)
