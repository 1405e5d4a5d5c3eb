"""Measurement pipeline: fringe fitting, voltage sweeps, and extraction.

A detector scan is fit to N + A*C'*cos(k_g*z + phi') by weighted linear
least squares in the basis {1, cos(k_g z), sin(k_g z)} (k_g is fixed by
the gratings, so the problem is linear and convex). Sweeping the
interaction voltage and locating the voltage-squared at which the fitted
phase crosses zero turns the ramp-pair frequency into a polarizability,
with the phase uncertainty propagated through to a fractional error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .constants import PLANCK_H, TWO_PI
from .errors import FitError, RangeError
from .fringe import (
    DetectorScan,
    FringeObservable,
    complex_fringe_amplitude,
    gaussian_envelope,
    synthesize_scan,
    unwrap_to,
)
from .phases import interaction_phase, stark_angular_frequency

__all__ = [
    "FringeFit",
    "PhaseSweepPoint",
    "CrossingFit",
    "PolarizabilityResult",
    "fit_fringe",
    "run_voltage_sweep",
    "zero_crossing_fit",
    "extract_alpha",
    "alpha_fractional_uncertainty",
    "correct_asymmetry",
    "sweep_seed",
]

MIN_SCAN_POINTS = 8


@dataclass(frozen=True)
class FringeFit:
    """Sinusoid parameters recovered from one detector scan.

    amplitude is the fitted fringe amplitude A*C' (counts/s, >= 0; the
    sign is absorbed into phase). covariance is the 3x3 matrix of the
    (mean, cos, sin) coefficients in counts/s units.
    """

    mean_rate: float
    amplitude: float
    phase: float
    dphi: float
    covariance: np.ndarray


@dataclass(frozen=True)
class PhaseSweepPoint:
    """One voltage step of a phase sweep: fitted phase and contrast."""

    v_squared: float
    phi: float
    dphi: float
    contrast: float

    def __post_init__(self):
        if self.v_squared < 0:
            raise ValueError("PhaseSweepPoint: v_squared must be >= 0")


@dataclass(frozen=True)
class CrossingFit:
    """Weighted-linear-fit location of the phase zero crossing."""

    v_squared_reph: float
    slope: float
    dv_squared: float
    dslope: float
    window: tuple[int, int]  # [start, stop) indices of the fitted points

    @property
    def dphi_at_crossing(self) -> float:
        """Propagated 1-sigma phase uncertainty at the crossing."""
        return self.dv_squared * abs(self.slope)


@dataclass(frozen=True)
class PolarizabilityResult:
    alpha: float
    frac_uncertainty: float
    v_squared_reph: float
    window: tuple[int, int]

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("PolarizabilityResult: alpha must be > 0")
        if self.frac_uncertainty <= 0:
            raise ValueError("PolarizabilityResult: frac_uncertainty must be > 0")


def fit_fringe(scan: DetectorScan, k_g: float) -> FringeFit:
    """Weighted linear least squares for the fringe sinusoid.

    Weights are inverse Poisson variances from the model prediction,
    iterated once (fit unweighted, predict, re-weight, re-fit); predicted
    means are floored at one count to avoid zero-count singularities.

    Raises
    ------
    FitError
        Singular or degenerate design (z grid that cannot separate the
        three coefficients, or zero fitted amplitude).
    """
    z = scan.z
    y = np.asarray(scan.counts, dtype=float)
    if z.size < MIN_SCAN_POINTS:
        raise ValueError(f"scan must have >= {MIN_SCAN_POINTS} points, got {z.size}")
    if (z.max() - z.min()) < TWO_PI / k_g - 1e-12:
        raise ValueError("scan must span at least one fringe period")

    design = scan.dwell * np.column_stack(
        [np.ones_like(z), np.cos(k_g * z), np.sin(k_g * z)]
    )

    def weighted_solve(weights):
        a = design.T @ (weights[:, None] * design)
        b = design.T @ (weights * y)
        if np.linalg.cond(a) > 1e12:
            raise FitError("singular design matrix: degenerate z grid")
        coeffs = np.linalg.solve(a, b)
        return coeffs, np.linalg.inv(a)

    coeffs, _ = weighted_solve(np.ones_like(y))
    mu = np.maximum(design @ coeffs, 1.0)
    coeffs, cov = weighted_solve(1.0 / mu)

    mean_rate, p, q = coeffs
    amplitude = math.hypot(p, q)
    if amplitude == 0.0:
        raise FitError("zero fitted fringe amplitude: phase undefined")
    phase = math.atan2(-q, p)
    grad = np.array([q, -p]) / amplitude**2
    var_phi = float(grad @ cov[1:, 1:] @ grad)
    if not var_phi > 0 or not math.isfinite(var_phi):
        raise FitError("non-positive phase variance: degenerate fit")
    return FringeFit(
        mean_rate=float(mean_rate),
        amplitude=float(amplitude),
        phase=float(phase),
        dphi=math.sqrt(var_phi),
        covariance=cov,
    )


def sweep_seed(seed: int, index: int) -> int:
    """Deterministic per-point child seed for sweep scans."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


def run_voltage_sweep(scenario, v_squared_values) -> list[PhaseSweepPoint]:
    """Synthesize and fit one detector scan per interaction voltage.

    The true fringe observables come from the velocity-average engine;
    each scan is fit blind and the fitted phases are unwrapped along the
    sweep (nearest 2*pi branch to the running prediction, seeded by the
    closed-form envelope at the first point).
    """
    dist = scenario.beam
    geom = scenario.geometry
    inter = scenario.interaction
    det = scenario.detection
    pair = scenario.shifter_pair()
    f_hz = scenario.shifter_frequency()

    z = det.z_grid(geom.k_g)
    points = []
    reference = None
    for i, v2 in enumerate(v_squared_values):
        if v2 < 0:
            raise ValueError("v_squared values must be >= 0")
        omega = stark_angular_frequency(math.sqrt(v2), inter.gap, inter.alpha)
        phi_v0 = interaction_phase(dist.v0, omega, inter.length)
        if reference is None:
            _, reference = gaussian_envelope(
                phi_v0, dist.sigma_ratio, f_hz, geom.l_shifters, dist.v0
            )
        contrast, phi_true = complex_fringe_amplitude(
            lambda v: interaction_phase(v, omega, inter.length),
            pair,
            dist,
            geom,
            reference=reference,
        )
        obs = FringeObservable(
            mean_rate=det.flux_hz,
            amplitude=det.base_contrast * det.flux_hz,
            contrast=min(contrast, 1.0),
            phase=phi_true,
        )
        scan = synthesize_scan(
            obs,
            z,
            geom.k_g,
            det.dwell_s,
            sweep_seed(det.seed, i) if det.noise else None,
            noise=det.noise,
        )
        fit = fit_fringe(scan, geom.k_g)
        points.append(
            PhaseSweepPoint(
                v_squared=float(v2),
                phi=unwrap_to(fit.phase, phi_true),
                dphi=fit.dphi,
                contrast=fit.amplitude / (det.base_contrast * det.flux_hz),
            )
        )
        reference = phi_true
    return points


def zero_crossing_fit(points, window: int = 10) -> CrossingFit:
    """Locate the voltage-squared at which the sweep phase crosses zero.

    Fits phi = a + b*V^2 (weighted by 1/dphi^2) over the `window` points
    nearest the empirical sign change, clamped to the sweep ends. The
    crossing uncertainty is the propagated phase uncertainty at the
    crossing divided by |slope|.

    Raises
    ------
    RangeError
        No sign change in the sweep, or zero fitted slope.
    """
    if window < 3:
        raise ValueError("window must be >= 3")
    n = len(points)
    if n < 3:
        raise ValueError("need at least 3 sweep points")
    phi = np.array([p.phi for p in points])
    v2 = np.array([p.v_squared for p in points])
    dphi = np.array([p.dphi for p in points])

    cross = None
    for i in range(n - 1):
        if phi[i] == 0.0 or phi[i] * phi[i + 1] < 0:
            cross = i
            break
    if cross is None:
        if phi[-1] == 0.0:
            cross = n - 2
        else:
            raise RangeError("no phase sign change within the sweep")

    w = min(window, n)
    start = min(max(cross + 1 - w // 2, 0), n - w)
    stop = start + w

    # Center the abscissa: raw V^2 values are ~1e5-1e6 and would make the
    # normal equations look singular for no physical reason.
    x = v2[start:stop]
    x0 = x.mean()
    xc = x - x0
    y = phi[start:stop]
    wt = 1.0 / dphi[start:stop] ** 2
    design = np.column_stack([np.ones_like(xc), xc])
    a_mat = design.T @ (wt[:, None] * design)
    if np.linalg.cond(a_mat) > 1e12:
        raise RangeError("degenerate crossing fit: voltage points coincide")
    coeffs = np.linalg.solve(a_mat, design.T @ (wt * y))
    cov = np.linalg.inv(a_mat)
    intercept, slope = coeffs
    if slope == 0.0:
        raise RangeError("zero phase slope: crossing undefined")

    xc_star = -intercept / slope
    x_star = x0 + xc_star
    var_phi_at = cov[0, 0] + 2 * xc_star * cov[0, 1] + xc_star**2 * cov[1, 1]
    dv2 = math.sqrt(max(var_phi_at, 0.0)) / abs(slope)
    return CrossingFit(
        v_squared_reph=float(x_star),
        slope=float(slope),
        dv_squared=float(dv2),
        dslope=math.sqrt(cov[1, 1]),
        window=(int(start), int(stop)),
    )


def extract_alpha(
    f: float, l_shifters: float, d: float, l_int: float, v_squared_reph: float
) -> float:
    """Polarizability from the rephasing condition.

    At the crossing the counter phase 2*pi*f*l_shifters/v equals the
    interaction phase alpha*V^2*l_int/(2*hbar*d^2*v) for every v, so

        alpha = 2*h*f*l_shifters*d^2 / (l_int * V^2_reph)
    """
    if f <= 0:
        raise ValueError("f must be > 0: no rephasing occurred")
    if v_squared_reph <= 0:
        raise ValueError("v_squared_reph must be > 0")
    if l_shifters <= 0 or d <= 0 or l_int <= 0:
        raise ValueError("geometry lengths must be > 0")
    return 2.0 * PLANCK_H * f * l_shifters * d**2 / (l_int * v_squared_reph)


def alpha_fractional_uncertainty(dphi: float, phi_int_v0: float) -> float:
    """Fractional polarizability error from the phase error budget.

    The extracted alpha is inversely proportional to V^2_reph, and the
    phase is linear in V^2 with total swing phi_int(v0), so d(alpha)/alpha
    = dphi/phi_int(v0). Larger operating phase means proportionally finer
    precision at the same phase sensitivity.
    """
    if phi_int_v0 <= 0:
        raise ValueError("phi_int_v0 must be > 0")
    return dphi / phi_int_v0


def correct_asymmetry(phase: float, phi_error: float) -> float:
    """Remove a known ramp-asymmetry DC offset from a measured phase."""
    return phase - phi_error


def correct_sweep(points, phi_error: float) -> list[PhaseSweepPoint]:
    """correct_asymmetry applied across a sweep."""
    return [replace(p, phi=correct_asymmetry(p.phi, phi_error)) for p in points]
