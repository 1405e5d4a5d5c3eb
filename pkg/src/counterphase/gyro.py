"""Closed-loop gyroscope mode: servo the ramp pair onto the Sagnac phase.

Rotation at rate Omega imprints 2*k_g*L_g^2*Omega/v, the same 1/v
dispersion as the ramp-pair counter phase, so a frequency

    f = k_g * L_g^2 * Omega / (pi * L_shifters)

nulls it for every velocity class at once. A proportional servo holds the
measured fringe phase at zero by steering f, and the accumulated angle is
the time integral of the equivalent rotation rate pi*f*L_shifters/
(k_g*L_g^2). Each loop step reads the residual the way the instrument
would: synthesize a short detector scan at the current f, fit it blind.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import TWO_PI
from .errors import ServoDivergenceError
from .estimate import fit_fringe, sweep_seed
from .fringe import FringeObservable, complex_fringe_amplitude, synthesize_scan
from .phases import sagnac_phase
from .waveforms import IdealSawtooth

__all__ = [
    "RotationProfile",
    "ServoState",
    "ServoTelemetry",
    "rotation_to_frequency",
    "frequency_to_rotation",
    "default_gain",
    "run_servo",
]

# Consecutive growing residuals (above the noise floor) that count as
# divergence. Growth needs a 5% margin per step: a loop settling into a
# constant tracking lag approaches it geometrically from below, which is
# monotone but has growth ratio -> 1 and must not be flagged.
DIVERGENCE_STEPS = 10
DIVERGENCE_FLOOR = 1e-6  # rad
DIVERGENCE_GROWTH = 1.05


def rotation_to_frequency(
    omega: float, k_g: float, l_g: float, l_shifters: float
) -> float:
    """Ramp frequency whose counter phase cancels the Sagnac phase at all v."""
    if l_shifters <= 0:
        raise ValueError("l_shifters must be > 0")
    return k_g * l_g**2 * omega / (math.pi * l_shifters)


def frequency_to_rotation(
    f: float, k_g: float, l_g: float, l_shifters: float
) -> float:
    """Equivalent rotation rate read back from the servo frequency."""
    return math.pi * f * l_shifters / (k_g * l_g**2)


def default_gain(v0: float, l_shifters: float) -> float:
    """Proportional gain (Hz per rad of residual) that halves the error per step.

    The residual responds to a frequency offset df by -2*pi*df*l_shifters/v0,
    so gain = 0.5 * v0 / (2*pi*l_shifters) closes half the gap each update.
    """
    return 0.5 * v0 / (TWO_PI * l_shifters)


@dataclass(frozen=True)
class RotationProfile:
    """Rotation rate versus time, piecewise linear between samples."""

    times: np.ndarray
    rates: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        r = np.asarray(self.rates, dtype=float)
        if t.ndim != 1 or t.shape != r.shape or t.size < 1:
            raise ValueError("RotationProfile: times and rates must be equal-length 1-d")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("RotationProfile: times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "rates", r)

    @classmethod
    def constant(cls, omega: float, t_total: float) -> "RotationProfile":
        return cls(np.array([0.0, t_total]), np.array([omega, omega]))

    @classmethod
    def ramp(cls, omega_start: float, omega_end: float, t_total: float) -> "RotationProfile":
        return cls(np.array([0.0, t_total]), np.array([omega_start, omega_end]))

    def rate_at(self, t):
        return np.interp(t, self.times, self.rates)

    @property
    def t_span(self) -> tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])

    def integral(self) -> float:
        """Exact integral of the piecewise-linear rate over the profile."""
        return float(np.trapezoid(self.rates, self.times))


@dataclass
class ServoState:
    """Loop state: current frequency, gain, and update cadence."""

    f: float
    gain: float
    dt: float
    residual: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("ServoState: dt must be > 0")
        if self.gain <= 0:
            raise ValueError("ServoState: gain must be > 0")


@dataclass(frozen=True)
class ServoTelemetry:
    """Per-step record of the servo run (row 0 is the initial state)."""

    t: np.ndarray
    omega_in: np.ndarray
    f: np.ndarray
    residual: np.ndarray
    theta: np.ndarray

    def to_csv(self, path, header_lines=()) -> None:
        lines = list(header_lines)
        lines.append("t_s,omega_in_rad_s,f_hz,residual_rad,theta_rad")
        for row in zip(self.t, self.omega_in, self.f, self.residual, self.theta):
            lines.append(",".join(repr(float(x)) for x in row))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def _measure_residual(f_hz, omega, scenario, seed, dwell):
    """One instrument readout: averaged fringe -> synthetic scan -> blind fit.

    Returns the fitted fringe phase (principal branch): the residual the
    servo actually sees. The servo never consults the true phase.
    """
    dist = scenario.beam
    geom = scenario.geometry
    det = scenario.detection
    if f_hz == 0.0:
        pair = None
    else:
        # A negative frequency is the same pair with swapped polarity, so
        # the loop can track rotations of either sign and survive noisy
        # excursions through zero.
        s = 1 if f_hz > 0 else -1
        pair = (
            IdealSawtooth(f=abs(f_hz), sign=s),
            IdealSawtooth(f=abs(f_hz), sign=-s),
        )
    contrast, phi = complex_fringe_amplitude(
        lambda v: sagnac_phase(v, omega, geom.k_g, geom.l_g), pair, dist, geom
    )
    obs = FringeObservable(
        mean_rate=det.flux_hz,
        amplitude=det.base_contrast * det.flux_hz,
        contrast=min(contrast, 1.0),
        phase=phi,
    )
    scan = synthesize_scan(
        obs, det.z_grid(geom.k_g), geom.k_g, dwell, seed, noise=det.noise
    )
    return fit_fringe(scan, geom.k_g).phase


def run_servo(profile: RotationProfile, state0: ServoState, scenario) -> ServoTelemetry:
    """Proportional-control servo over the rotation profile.

    Each interval [t_k, t_k + dt): read the residual at the current f,
    update f by gain*residual, and accumulate angle by trapezoid over the
    equivalent-rotation estimates. Raises ServoDivergenceError if the
    residual magnitude grows for DIVERGENCE_STEPS consecutive steps.
    """
    det = scenario.detection
    geom = scenario.geometry
    t_start, t_end = profile.t_span
    n_steps = int(round((t_end - t_start) / state0.dt))
    if n_steps < 1:
        raise ValueError("profile shorter than one servo interval")
    dwell = state0.dt / det.n_z

    f = state0.f
    theta = state0.theta
    omega_est_prev = frequency_to_rotation(f, geom.k_g, geom.l_g, geom.l_shifters)

    t_out = np.empty(n_steps + 1)
    omega_out = np.empty(n_steps + 1)
    f_out = np.empty(n_steps + 1)
    resid_out = np.empty(n_steps + 1)
    theta_out = np.empty(n_steps + 1)
    t_out[0], omega_out[0] = t_start, profile.rate_at(t_start)
    f_out[0], resid_out[0], theta_out[0] = f, state0.residual, theta

    prev_abs = None
    growing = 0
    for k in range(n_steps):
        t_k = t_start + k * state0.dt
        omega_k = float(profile.rate_at(t_k))
        seed = sweep_seed(det.seed, k) if det.noise else None
        residual = _measure_residual(f, omega_k, scenario, seed, dwell)
        f = f + state0.gain * residual
        omega_est = frequency_to_rotation(f, geom.k_g, geom.l_g, geom.l_shifters)
        theta = theta + 0.5 * state0.dt * (omega_est_prev + omega_est)
        omega_est_prev = omega_est

        abs_r = abs(residual)
        if (
            prev_abs is not None
            and abs_r > prev_abs * DIVERGENCE_GROWTH
            and abs_r > DIVERGENCE_FLOOR
        ):
            growing += 1
            if growing >= DIVERGENCE_STEPS:
                raise ServoDivergenceError(step=k, residual=residual)
        else:
            growing = 0
        prev_abs = abs_r

        t_out[k + 1] = t_start + (k + 1) * state0.dt
        omega_out[k + 1] = profile.rate_at(t_out[k + 1])
        f_out[k + 1] = f
        resid_out[k + 1] = residual
        theta_out[k + 1] = theta

    return ServoTelemetry(
        t=t_out, omega_in=omega_out, f=f_out, residual=resid_out, theta=theta_out
    )
