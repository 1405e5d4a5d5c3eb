"""Closed-form phase shifts for a three-grating atom-beam interferometer.

Every interaction studied here imprints a differential phase between the two
interferometer arms that depends on the atom's longitudinal speed v. The
functions in this module are the exact single-atom formulas: the transit-time
phase of a localized interaction (proportional to 1/v), the Stark angular
frequency that drives it, the rotation-induced Sagnac phase, the generic
power-law dispersion model, and the operating-point formulas that say how
large an interaction phase can usefully get before velocity averaging
destroys the fringes.

All quantities are SI; phases are radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import GRATING_WAVEVECTOR, HBAR, TWO_PI

__all__ = [
    "VelocityDistribution",
    "InteractionRegion",
    "InterferometerGeometry",
    "interaction_phase",
    "stark_angular_frequency",
    "power_law_phase",
    "optimal_uncompensated_phase",
    "compensated_phase_bound",
    "sagnac_phase",
    "rephasing_frequency",
]


@dataclass(frozen=True)
class VelocityDistribution:
    """Truncated Gaussian model of the beam's longitudinal speed.

    Parameters
    ----------
    v0 : float
        Mean speed (m/s).
    sigma_v : float
        RMS spread (m/s).
    trunc_k : float
        Half-width of the support in units of sigma_v. The density is
        renormalized over [v0 - trunc_k*sigma_v, v0 + trunc_k*sigma_v],
        which keeps the support strictly positive and bounds quadrature.
    """

    v0: float
    sigma_v: float
    trunc_k: float = 5.0

    def __post_init__(self):
        if self.v0 <= 0:
            raise ValueError("VelocityDistribution: v0 must be > 0")
        if self.sigma_v <= 0:
            raise ValueError("VelocityDistribution: sigma_v must be > 0")
        if self.trunc_k < 3:
            raise ValueError("VelocityDistribution: trunc_k must be >= 3")
        if self.v0 - self.trunc_k * self.sigma_v <= 0:
            raise ValueError(
                "VelocityDistribution: support reaches non-positive speeds "
                "(require v0 - trunc_k*sigma_v > 0)"
            )

    @property
    def sigma_ratio(self) -> float:
        """Fractional spread sigma_v / v0."""
        return self.sigma_v / self.v0

    @property
    def support(self) -> tuple[float, float]:
        """Lower and upper edge of the truncated support (m/s)."""
        half = self.trunc_k * self.sigma_v
        return self.v0 - half, self.v0 + half

    def pdf(self, v):
        """Renormalized density; zero outside the truncated support."""
        v = np.asarray(v, dtype=float)
        lo, hi = self.support
        norm = (
            self.sigma_v
            * math.sqrt(2.0 * math.pi)
            * math.erf(self.trunc_k / math.sqrt(2.0))
        )
        dens = np.exp(-0.5 * ((v - self.v0) / self.sigma_v) ** 2) / norm
        return np.where((v >= lo) & (v <= hi), dens, 0.0)


@dataclass(frozen=True)
class InteractionRegion:
    """Parallel-plate interaction capacitor plus the atom that crosses it.

    Parameters
    ----------
    voltage : float
        Plate voltage (V).
    gap : float
        Plate separation (m).
    length : float
        Length of the region along the beam (m).
    alpha : float
        Static polarizability of the atom (C m^2 / V).
    """

    voltage: float
    gap: float
    length: float
    alpha: float

    def __post_init__(self):
        if self.gap <= 0:
            raise ValueError("InteractionRegion: gap must be > 0")
        if self.length <= 0:
            raise ValueError("InteractionRegion: length must be > 0")
        if self.alpha <= 0:
            raise ValueError("InteractionRegion: alpha must be > 0")
        if self.voltage < 0:
            raise ValueError("InteractionRegion: voltage must be >= 0")

    def omega_int(self) -> float:
        """Stark angular frequency for the configured voltage (rad/s)."""
        return stark_angular_frequency(self.voltage, self.gap, self.alpha)


@dataclass(frozen=True)
class InterferometerGeometry:
    """Fixed lengths of the interferometer.

    Parameters
    ----------
    l_shifters : float
        Separation between the two phase shifters (m).
    l_g : float
        Separation between adjacent gratings (m).
    k_g : float
        Grating wavevector (rad/m); sets the fringe period in detector
        position. Defaults to 2 pi / 100 nm.
    """

    l_shifters: float
    l_g: float
    k_g: float = GRATING_WAVEVECTOR

    def __post_init__(self):
        if self.l_shifters <= 0 or self.l_g <= 0 or self.k_g <= 0:
            raise ValueError(
                "InterferometerGeometry: l_shifters, l_g, k_g must all be > 0"
            )


def _require_positive_speed(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        raise ValueError("speed v must be > 0")
    return v


def interaction_phase(v, omega_int: float, length: float):
    """Transit-time phase of a localized interaction region.

    An energy shift hbar*omega_int applied over a region of the given
    length is sampled for a time length/v, so the accumulated differential
    phase is omega_int * length / v. Exact 1/v dispersion.

    Parameters
    ----------
    v : float or array
        Atom speed (m/s), > 0.
    omega_int : float
        Angular frequency of the energy shift (rad/s).
    length : float
        Interaction region length (m), > 0.

    Returns
    -------
    float or array
        Phase in rad, same shape as v.
    """
    if length <= 0:
        raise ValueError("interaction region length must be > 0")
    v = _require_positive_speed(v)
    out = omega_int * length / v
    return float(out) if out.ndim == 0 else out


def stark_angular_frequency(voltage: float, gap: float, alpha: float) -> float:
    """Angular frequency of the Stark energy shift in a plate capacitor.

    The energy of a polarizable atom in the field E = voltage/gap drops by
    alpha*E^2/2; dividing by hbar gives the phase-accumulation rate.

    Parameters
    ----------
    voltage : float
        Plate voltage (V), >= 0.
    gap : float
        Plate separation (m), > 0.
    alpha : float
        Polarizability (C m^2 / V), > 0.

    Returns
    -------
    float
        omega_int in rad/s. Scales as voltage squared.
    """
    if gap <= 0:
        raise ValueError("plate gap must be > 0")
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    if voltage < 0:
        raise ValueError("voltage must be >= 0")
    return 0.5 * alpha * (voltage / gap) ** 2 / HBAR


def power_law_phase(v, phi0: float, v0: float, n: int):
    """Generic dispersion model: phase phi0 * (v/v0)**n.

    n = -1 reproduces transit-time interactions, n = -2 covers phases from
    gravity or field gradients, n = 0 is dispersionless.
    """
    if v0 <= 0:
        raise ValueError("reference speed v0 must be > 0")
    v = _require_positive_speed(v)
    out = phi0 * (v / v0) ** float(n)
    return float(out) if out.ndim == 0 else out


def optimal_uncompensated_phase(n: int, v0: float, sigma_v: float) -> float:
    """Largest useful interaction phase without a counter phase.

    Velocity averaging of a v**n phase costs contrast exp(-(n phi sigma/v0)^2/2)
    to first order, so precision phi*C' is maximized at |1/n| * v0/sigma_v.

    Raises ValueError for n = 0 (no dispersion, no optimum).
    """
    if n == 0:
        raise ValueError("n = 0 has no dispersion and no optimum phase")
    if v0 <= 0 or sigma_v <= 0:
        raise ValueError("v0 and sigma_v must be > 0")
    return abs(1.0 / n) * (v0 / sigma_v)


def compensated_phase_bound(n: int, v0: float, sigma_v: float) -> float:
    """Operating-point bound when a 1/v counter phase cancels first order.

    With the counter phase tuned to cancel the first-order velocity
    dependence of a v**n interaction, the surviving quadratic term limits
    the usable phase to |1/(n(n+1))| * (v0/sigma_v)^2. For n = -1 the
    cancellation is exact at every speed, so the bound is infinite
    (returned as math.inf). n = 0 raises ValueError.
    """
    if n == 0:
        raise ValueError("n = 0 has no dispersion to compensate")
    if v0 <= 0 or sigma_v <= 0:
        raise ValueError("v0 and sigma_v must be > 0")
    if n == -1:
        return math.inf
    return abs(1.0 / (n * (n + 1))) * (v0 / sigma_v) ** 2


def sagnac_phase(v, omega: float, k_g: float, l_g: float):
    """Rotation-induced phase 2 * k_g * l_g^2 * omega / v.

    Same 1/v dispersion as the counter phase, so rotation can be nulled
    for every velocity class at once.

    Parameters
    ----------
    v : float or array
        Atom speed (m/s), > 0.
    omega : float
        Rotation rate (rad/s), sign carries direction.
    k_g : float
        Grating wavevector (rad/m).
    l_g : float
        Grating separation (m).
    """
    v = _require_positive_speed(v)
    out = 2.0 * k_g * l_g**2 * omega / v
    return float(out) if out.ndim == 0 else out


def rephasing_frequency(omega_int: float, l_int: float, l_shifters: float) -> float:
    """Ramp frequency at which the counter phase cancels a 1/v interaction.

    Setting 2 pi f L_shifters / v equal to omega_int * l_int / v for all v
    gives f = omega_int * l_int / (2 pi L_shifters).
    """
    if l_shifters <= 0:
        raise ValueError("l_shifters must be > 0")
    return omega_int * l_int / (TWO_PI * l_shifters)
