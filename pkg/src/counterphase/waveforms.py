"""Time-dependent phase-shifter waveforms and their diagnostics.

Each phase shifter multiplies the atom's wavefunction by exp(i*phi(t)) where
phi(t) is a periodic ramp. An ideal sawtooth rising 0 -> 2*pi each period is
indistinguishable from a frequency shift, so two opposed ramps a distance
L_shifters apart imprint the velocity-dependent counter phase
-2*pi*f*L_shifters/v. This module provides the ideal sawtooth, the
RC-filtered ramp that real drive electronics produce, the sum-of-pair and
mean-asymmetry diagnostics, the first-harmonic fidelity measure, and the
cylindrical-electrode physical model of a single shifter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize

from .constants import HBAR, TWO_PI

__all__ = [
    "IdealSawtooth",
    "RcRamp",
    "NullWaveform",
    "Waveform",
    "ShifterGeometry",
    "RcFidelity",
    "phase_at",
    "counter_phase",
    "pair_sum_phase",
    "asymmetry_error",
    "first_harmonic",
    "cylinder_phase",
    "optimize_rc_fidelity",
    "mirror",
]

# Samples per ramp period for the time-quadrature diagnostics. The
# waveforms are piecewise smooth with a single reset discontinuity, so a
# uniform trapezoid rule at this resolution is ample.
N_TIME_SAMPLES = 4096


@dataclass(frozen=True)
class IdealSawtooth:
    """Linear phase ramp 0 -> sign * scale * 2*pi once per period.

    Parameters
    ----------
    f : float
        Ramp repetition frequency (Hz), >= 0.
    sign : int
        +1 or -1, the ramp direction.
    scale : float
        Ramp peak in units of 2*pi. 1.0 is the ideal resetting ramp;
        other values model drive-amplitude errors.
    t0 : float
        Ramp start-time offset (s) relative to the common clock.
    """

    f: float
    sign: int = 1
    scale: float = 1.0
    t0: float = 0.0

    def __post_init__(self):
        if self.f < 0:
            raise ValueError("IdealSawtooth: f must be >= 0")
        if self.sign not in (-1, 1):
            raise ValueError("IdealSawtooth: sign must be +1 or -1")
        if self.scale <= 0:
            raise ValueError("IdealSawtooth: scale must be > 0")

    @property
    def period(self) -> float:
        if self.f <= 0:
            raise ValueError("waveform frequency must be > 0 to evaluate")
        return 1.0 / self.f

    def phase(self, t):
        """Instantaneous phase (rad), wrapped to one period."""
        T = self.period
        t = np.asarray(t, dtype=float)
        out = self.sign * self.scale * TWO_PI * self.f * np.mod(t - self.t0, T)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RcRamp:
    """RC-filtered approximation to the sawtooth.

    A rectangle-wave voltage through an RC filter charges as 1 - e^(-t/rc);
    the shifter phase responds to voltage squared, so during the on-cycle
    (duration p/f) the phase is sign * gamma * (1 - e^(-t/rc))^2. The diode
    reset at the end of the on-cycle is modeled as instantaneous: phase is
    zero for the rest of the period.

    rc is an absolute time in seconds (not a multiple of 1/f), so any
    reading of a quoted "RC" constant can be expressed directly.
    """

    f: float
    p: float = 0.9
    gamma: float = 0.83 * math.pi
    rc: float = 1e-5
    sign: int = 1
    t0: float = 0.0

    def __post_init__(self):
        if self.f <= 0:
            raise ValueError("RcRamp: f must be > 0")
        if not 0.0 < self.p < 1.0:
            raise ValueError("RcRamp: duty cycle p must satisfy 0 < p < 1")
        if self.gamma <= 0:
            raise ValueError("RcRamp: gamma must be > 0")
        if self.rc <= 0:
            raise ValueError("RcRamp: rc must be > 0")
        if self.sign not in (-1, 1):
            raise ValueError("RcRamp: sign must be +1 or -1")

    @property
    def period(self) -> float:
        return 1.0 / self.f

    def phase(self, t):
        """Instantaneous phase (rad), wrapped to one period."""
        T = self.period
        t = np.asarray(t, dtype=float)
        tp = np.mod(t - self.t0, T)
        on = self.sign * self.gamma * (1.0 - np.exp(-tp / self.rc)) ** 2
        out = np.where(tp < self.p * T, on, 0.0)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class NullWaveform:
    """Shifter switched off: identically zero phase."""

    def phase(self, t):
        out = np.zeros_like(np.asarray(t, dtype=float))
        return float(out) if out.ndim == 0 else out


Waveform = IdealSawtooth | RcRamp | NullWaveform


def mirror(w: Waveform) -> Waveform:
    """The sign-flipped twin of a waveform (exact phi -> -phi)."""
    if isinstance(w, NullWaveform):
        return w
    return replace(w, sign=-w.sign)


@dataclass(frozen=True)
class ShifterGeometry:
    """Cylindrical-electrode shifter geometry.

    Parameters
    ----------
    radius : float
        Cylinder radius (m).
    ground_distance : float
        Cylinder-to-ground-plane distance (m).
    path_separation : float
        Separation of the two interferometer paths (m).
    path_distance : float
        Mean distance of the paths from the cylinder axis (m).
    """

    radius: float
    ground_distance: float
    path_separation: float
    path_distance: float

    def __post_init__(self):
        if not 0 < self.radius < self.ground_distance:
            raise ValueError(
                "ShifterGeometry: require 0 < radius < ground_distance"
            )
        if self.path_separation <= 0:
            raise ValueError("ShifterGeometry: path_separation must be > 0")
        if self.path_distance <= 0:
            raise ValueError("ShifterGeometry: path_distance must be > 0")


def phase_at(w: Waveform, t):
    """Instantaneous shifter phase (rad) at time t, wrapped to one period."""
    return w.phase(t)


def counter_phase(v, f: float, l_shifters: float):
    """Engineered velocity-dependent phase of an opposed ramp pair.

    An atom reaches the second shifter a time l_shifters/v after the first,
    so the pair imprints -2*pi*f*l_shifters/v. Returned unwrapped (the full
    accumulated value, not modulo 2*pi).
    """
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        raise ValueError("speed v must be > 0")
    out = -TWO_PI * f * l_shifters / v
    return float(out) if out.ndim == 0 else out


def pair_sum_phase(w1: Waveform, w2: Waveform, t, tau: float):
    """Total shifter phase seen by one atom: phi1(t) + phi2(t + tau).

    tau is the flight time between the shifters (s), >= 0.
    """
    if tau < 0:
        raise ValueError("flight time tau must be >= 0")
    return phase_at(w1, t) + phase_at(w2, np.asarray(t, dtype=float) + tau)


def _common_period(w1: Waveform, w2: Waveform) -> float:
    f1 = getattr(w1, "f", None)
    f2 = getattr(w2, "f", None)
    if f1 is not None and f2 is not None and f1 != f2:
        raise ValueError(
            f"waveform frequencies must match (got {f1} Hz and {f2} Hz)"
        )
    f = f1 if f1 is not None else f2
    if f is None:
        raise ValueError("at least one waveform must be periodic (non-null)")
    if f <= 0:
        raise ValueError("waveform frequency must be > 0")
    return 1.0 / f


def _period_mean(func, period: float, n: int = N_TIME_SAMPLES):
    """Trapezoid mean of func over one period on n uniform intervals."""
    t = np.linspace(0.0, period, n + 1)
    return np.trapezoid(func(t), dx=period / n) / period


def asymmetry_error(w1: Waveform, w2: Waveform) -> float:
    """Mean of phi1(t) + phi2(t) over one period.

    A perfectly opposed pair averages to zero; any amplitude mismatch
    leaves a DC phase offset that biases the measured fringe phase. Both
    waveforms must share the same frequency.
    """
    if isinstance(w1, NullWaveform) and isinstance(w2, NullWaveform):
        return 0.0
    period = _common_period(w1, w2)
    return float(_period_mean(lambda t: w1.phase(t) + w2.phase(t), period))


def first_harmonic(w: Waveform) -> complex:
    """Fidelity of a ramp to the ideal sawtooth.

    Returns c1 = <exp(i*phi(t)) * exp(-i*sign*2*pi*f*t)> over one period.
    An ideal resetting ramp makes exp(i*phi) a pure tone at sign*f, giving
    |c1| = 1; any shape error pushes |c1| below 1. Null waveforms carry no
    tone and return 0.
    """
    if isinstance(w, NullWaveform):
        return 0j
    period = _common_period(w, w)
    c1 = _period_mean(
        lambda t: np.exp(1j * w.phase(t)) * np.exp(-1j * w.sign * TWO_PI * w.f * t),
        period,
    )
    return complex(c1)


def cylinder_phase(
    geom: ShifterGeometry,
    voltage: float,
    v,
    alpha: float,
    *,
    prefactor: float = 0.5 * math.pi,
):
    """Phase imprinted on the path pair by a charged cylindrical electrode.

    The logarithmic potential of a cylinder at distance x from the paths
    gives, to leading order in path_separation/x,

        phi = prefactor / hbar * ln(2a/r)^-2 * alpha * w * V^2 / (v * x^2)

    with a = ground_distance, r = radius, w = path_separation. The 1/hbar
    converts the Stark energy gradient into a phase rate; the geometric
    prefactor (default pi/2) is exposed because the thin-wire model is only
    leading-order.

    Exactly proportional to voltage squared and to 1/v.
    """
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        raise ValueError("speed v must be > 0")
    log_term = math.log(2.0 * geom.ground_distance / geom.radius)
    out = (
        prefactor
        / HBAR
        * log_term**-2
        * alpha
        * geom.path_separation
        * voltage**2
        / (v * geom.path_distance**2)
    )
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RcFidelity:
    """Result of tuning an RC ramp for maximum first-harmonic magnitude."""

    gamma: float  # rad
    rc: float  # s
    magnitude: float  # |c1| at the optimum
    waveform: RcRamp


def optimize_rc_fidelity(f: float, p: float = 0.9, sign: int = 1) -> RcFidelity:
    """Find the (gamma, rc) pair that best approximates an ideal sawtooth.

    Maximizes |first_harmonic| of an RcRamp at fixed frequency and duty
    cycle. Deterministic Nelder-Mead from a fixed start; the objective is
    smooth and single-basined over the physical region.
    """
    if f <= 0:
        raise ValueError("f must be > 0")

    def negative_magnitude(x):
        gamma, rc_frac = x
        if gamma <= 0 or rc_frac <= 0:
            return 1.0
        w = RcRamp(f=f, p=p, gamma=gamma, rc=rc_frac / f, sign=sign)
        return -abs(first_harmonic(w))

    res = minimize(
        negative_magnitude,
        x0=(TWO_PI, 0.4),
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000},
    )
    gamma, rc_frac = res.x
    w = RcRamp(f=f, p=p, gamma=float(gamma), rc=float(rc_frac / f), sign=sign)
    return RcFidelity(
        gamma=float(gamma),
        rc=float(rc_frac / f),
        magnitude=float(-res.fun),
        waveform=w,
    )
