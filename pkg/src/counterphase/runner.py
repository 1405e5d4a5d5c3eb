"""Experiment runners: execute a scenario, write CSV and summary files.

Each runner is deterministic for a fixed scenario: output files carry the
tool version, the seed, and the full resolved config as `# key=value`
comment lines, and contain nothing time- or host-dependent, so reruns are
byte-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib.metadata import PackageNotFoundError, version as _pkg_version
from pathlib import Path

import numpy as np

from .constants import PLANCK_H, TWO_PI
from .errors import ConfigError
from .estimate import (
    CrossingFit,
    FringeFit,
    PhaseSweepPoint,
    PolarizabilityResult,
    alpha_fractional_uncertainty,
    correct_sweep,
    extract_alpha,
    fit_fringe,
    run_voltage_sweep,
    zero_crossing_fit,
)
from .fringe import (
    FringeObservable,
    McAmplitude,
    complex_fringe_amplitude,
    gaussian_envelope,
    monte_carlo_amplitude,
    synthesize_scan,
    unwrap_to,
)
from .gyro import (
    RotationProfile,
    ServoState,
    ServoTelemetry,
    default_gain,
    rotation_to_frequency,
    run_servo,
)
from .phases import interaction_phase, stark_angular_frequency
from .scenario import Scenario, flatten_config
from .waveforms import IdealSawtooth, RcRamp, asymmetry_error

__all__ = [
    "TOOL_VERSION",
    "run_contrast_sweep",
    "run_fringe_scan",
    "run_polarizability",
    "run_mc_validate",
    "run_gyro",
]

try:
    TOOL_VERSION = _pkg_version("counterphase")
except PackageNotFoundError:  # running from a source tree without install
    TOOL_VERSION = "0+unknown"


def _header_lines(scenario: Scenario, experiment: str) -> list[str]:
    lines = [
        f"# counterphase {TOOL_VERSION}",
        f"# experiment={experiment}",
        f"# seed={scenario.detection.seed}",
    ]
    for path, value in sorted(flatten_config(scenario.resolved)):
        lines.append(f"# cfg.{path}={value!r}")
    return lines


def _write_lines(path: Path, lines) -> Path:
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def _fmt(x) -> str:
    return repr(float(x))


def _parabolic_peak(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Vertex refinement of a gridded maximum (quadratic through 3 points)."""
    i = int(np.argmax(y))
    if i == 0 or i == len(y) - 1:
        return float(x[i]), float(y[i])
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    denom = y0 - 2 * y1 + y2
    if denom == 0:
        return float(x[i]), float(y[i])
    shift = 0.5 * (y0 - y2) / denom
    xp = x[i] + shift * (x[i + 1] - x[i])
    yp = y1 - 0.25 * (y0 - y2) * shift
    return float(xp), float(yp)


def _fwhm(x: np.ndarray, y: np.ndarray) -> float:
    """Full width at half maximum by linear interpolation on the grid.

    Revival peaks are symmetric about their maximum, so if only one half
    crossing lies inside the grid (peak at the grid edge, or a shoulder
    running off the end) the width is twice the one-sided half width.
    """
    i = int(np.argmax(y))
    half = y[i] / 2.0
    left = right = math.nan
    for j in range(i, 0, -1):
        if y[j - 1] <= half:
            t = (half - y[j - 1]) / (y[j] - y[j - 1])
            left = x[j - 1] + t * (x[j] - x[j - 1])
            break
    for j in range(i, len(y) - 1):
        if y[j + 1] <= half:
            t = (half - y[j]) / (y[j + 1] - y[j])
            right = x[j] + t * (x[j + 1] - x[j])
            break
    if math.isnan(left) and math.isnan(right):
        return math.nan
    if math.isnan(left):
        return float(2.0 * (right - x[i]))
    if math.isnan(right):
        return float(2.0 * (x[i] - left))
    return float(right - left)


@dataclass(frozen=True)
class ContrastPeak:
    f_hz: float
    phi_peak: float
    contrast_peak: float
    fwhm: float


@dataclass(frozen=True)
class ContrastSweepResult:
    rows: list[tuple[float, float, float, float]]
    peaks: list[ContrastPeak]
    csv_path: Path
    summary_path: Path


def run_contrast_sweep(scenario: Scenario, out_dir) -> ContrastSweepResult:
    """Contrast and phase versus interaction phase, one trace per frequency.

    The interaction is swept as a pure 1/v phase with strength phi_int(v0)
    on a uniform grid; the configured shifter pair runs at each frequency
    in the list (0 means shifters off).
    """
    out_dir = Path(out_dir)
    block = scenario.experiment_block("contrast-sweep")
    dist, geom = scenario.beam, scenario.geometry
    step = block["phi_step_rad"]
    phi_grid = np.arange(0.0, block["phi_max_rad"] + 0.5 * step, step)

    rows = []
    peaks = []
    for f_hz in block["f_hz_list"]:
        pair = scenario.shifter_pair(f_hz=f_hz)
        _, reference = gaussian_envelope(
            0.0, dist.sigma_ratio, f_hz, geom.l_shifters, dist.v0
        )
        contrasts = np.empty_like(phi_grid)
        for i, phi0 in enumerate(phi_grid):
            contrast, phase = complex_fringe_amplitude(
                lambda v: phi0 * dist.v0 / v, pair, dist, geom, reference=reference
            )
            contrasts[i] = contrast
            rows.append((f_hz, float(phi0), contrast, phase))
            reference = phase
        phi_peak, c_peak = _parabolic_peak(phi_grid, contrasts)
        peaks.append(
            ContrastPeak(
                f_hz=f_hz,
                phi_peak=phi_peak,
                contrast_peak=c_peak,
                fwhm=_fwhm(phi_grid, contrasts),
            )
        )

    lines = _header_lines(scenario, "contrast-sweep")
    lines.append("f_hz,phi_int_rad,contrast,phi_prime_rad")
    lines += [",".join(_fmt(x) for x in row) for row in rows]
    csv_path = _write_lines(out_dir / "contrast_sweep.csv", lines)

    summary = _header_lines(scenario, "contrast-sweep")
    for pk in peaks:
        summary.append(
            f"f_hz={_fmt(pk.f_hz)} phi_peak_rad={_fmt(pk.phi_peak)} "
            f"contrast_peak={_fmt(pk.contrast_peak)} fwhm_rad={_fmt(pk.fwhm)}"
        )
    summary_path = _write_lines(out_dir / "contrast_sweep_summary.txt", summary)
    return ContrastSweepResult(rows, peaks, csv_path, summary_path)


@dataclass(frozen=True)
class FringeScanResult:
    contrast_true: float
    phase_true: float
    fit: FringeFit
    csv_path: Path
    summary_path: Path


def run_fringe_scan(scenario: Scenario, out_dir) -> FringeScanResult:
    """One detector scan at the configured voltage and shifter settings."""
    out_dir = Path(out_dir)
    dist, geom, det = scenario.beam, scenario.geometry, scenario.detection
    inter = scenario.interaction
    omega = inter.omega_int()
    pair = scenario.shifter_pair()
    contrast, phase = complex_fringe_amplitude(
        lambda v: interaction_phase(v, omega, inter.length), pair, dist, geom
    )
    obs = FringeObservable(
        mean_rate=det.flux_hz,
        amplitude=det.base_contrast * det.flux_hz,
        contrast=min(contrast, 1.0),
        phase=phase,
    )
    scan = synthesize_scan(
        obs,
        det.z_grid(geom.k_g),
        geom.k_g,
        det.dwell_s,
        det.seed if det.noise else None,
        noise=det.noise,
    )
    fit = fit_fringe(scan, geom.k_g)

    lines = _header_lines(scenario, "fringe-scan")
    lines.append(f"# dwell_s={_fmt(det.dwell_s)}")
    lines.append("z_m,counts")
    for zi, ci in zip(scan.z, scan.counts):
        ci = int(ci) if float(ci).is_integer() else float(ci)
        lines.append(f"{_fmt(zi)},{ci!r}")
    csv_path = _write_lines(out_dir / "fringe_scan.csv", lines)

    summary = _header_lines(scenario, "fringe-scan")
    summary += [
        f"contrast_true={_fmt(contrast)}",
        f"phase_true_rad={_fmt(phase)}",
        f"fit_mean_rate_hz={_fmt(fit.mean_rate)}",
        f"fit_amplitude_hz={_fmt(fit.amplitude)}",
        f"fit_phase_rad={_fmt(fit.phase)}",
        f"fit_phase_unwrapped_rad={_fmt(unwrap_to(fit.phase, phase))}",
        f"fit_dphi_rad={_fmt(fit.dphi)}",
    ]
    summary_path = _write_lines(out_dir / "fringe_scan_summary.txt", summary)
    return FringeScanResult(contrast, phase, fit, csv_path, summary_path)


@dataclass(frozen=True)
class PolarizabilityRun:
    points: list[PhaseSweepPoint]
    crossing: CrossingFit
    result: PolarizabilityResult
    alpha_true: float
    relative_error: float
    phi_error: float
    csv_path: Path
    summary_path: Path


def run_polarizability(scenario: Scenario, out_dir) -> PolarizabilityRun:
    """Voltage sweep -> asymmetry correction -> zero crossing -> alpha.

    The sweep grid is centered on the rephasing voltage predicted from the
    configured (true) polarizability unless explicit bounds are given, the
    way a real sweep would be centered after a coarse search.
    """
    out_dir = Path(out_dir)
    block = scenario.experiment_block("polarizability")
    dist, geom = scenario.beam, scenario.geometry
    inter = scenario.interaction
    f_hz = scenario.shifter_frequency()
    pair = scenario.shifter_pair()
    if f_hz <= 0 or pair is None:
        raise ConfigError(
            "shifters.f_hz: the rephasing pipeline requires running shifters "
            "with f_hz > 0"
        )

    phi_reph = TWO_PI * f_hz * geom.l_shifters / dist.v0
    v2_center = 2.0 * PLANCK_H * f_hz * geom.l_shifters * inter.gap**2 / (
        inter.length * inter.alpha
    )
    slope_pred = phi_reph / v2_center
    span = block["phase_span_rad"] / slope_pred
    v2_min = block["v2_min_volt2"]
    v2_max = block["v2_max_volt2"]
    if v2_min is None:
        v2_min = max(v2_center - 0.5 * span, 0.0)
    if v2_max is None:
        v2_max = v2_center + 0.5 * span
    v2_grid = np.linspace(v2_min, v2_max, block["n_points"])

    points = run_voltage_sweep(scenario, v2_grid)
    phi_error = asymmetry_error(*pair)
    corrected = correct_sweep(points, phi_error)
    crossing = zero_crossing_fit(corrected, window=block["window"])
    alpha_hat = extract_alpha(
        f_hz, geom.l_shifters, inter.gap, inter.length, crossing.v_squared_reph
    )
    frac = alpha_fractional_uncertainty(crossing.dphi_at_crossing, phi_reph)
    result = PolarizabilityResult(
        alpha=alpha_hat,
        frac_uncertainty=frac,
        v_squared_reph=crossing.v_squared_reph,
        window=crossing.window,
    )
    rel_err = alpha_hat / inter.alpha - 1.0

    lines = _header_lines(scenario, "polarizability")
    lines.append("V2_volt2,phi_rad,dphi_rad,contrast")
    for p in corrected:
        lines.append(
            f"{_fmt(p.v_squared)},{_fmt(p.phi)},{_fmt(p.dphi)},{_fmt(p.contrast)}"
        )
    csv_path = _write_lines(out_dir / "polarizability_sweep.csv", lines)

    summary = _header_lines(scenario, "polarizability")
    summary += [
        f"alpha_true_si={_fmt(inter.alpha)}",
        f"alpha_extracted_si={_fmt(alpha_hat)}",
        f"alpha_relative_error={_fmt(rel_err)}",
        f"v_squared_reph_volt2={_fmt(crossing.v_squared_reph)}",
        f"dv_squared_volt2={_fmt(crossing.dv_squared)}",
        f"slope_rad_per_volt2={_fmt(crossing.slope)}",
        f"phi_error_rad={_fmt(phi_error)}",
        f"frac_uncertainty={_fmt(frac)}",
        f"window_start={crossing.window[0]}",
        f"window_stop={crossing.window[1]}",
    ]
    summary_path = _write_lines(out_dir / "polarizability_summary.txt", summary)
    return PolarizabilityRun(
        points=corrected,
        crossing=crossing,
        result=result,
        alpha_true=inter.alpha,
        relative_error=rel_err,
        phi_error=phi_error,
        csv_path=csv_path,
        summary_path=summary_path,
    )


@dataclass(frozen=True)
class McCheckRow:
    case: str
    quantity: str
    quadrature: float
    monte_carlo: float
    se: float
    z: float


@dataclass(frozen=True)
class McValidateResult:
    rows: list[McCheckRow]
    passed: bool
    csv_path: Path
    summary_path: Path


def _zscore(diff: float, se: float) -> float:
    if diff == 0.0:
        return 0.0
    if se == 0.0:
        return math.inf
    return diff / se


def run_mc_validate(scenario: Scenario, out_dir, mc_geometry=None) -> McValidateResult:
    """Quadrature versus Monte Carlo on three shifter cases, with z-scores.

    mc_geometry deliberately feeds the Monte Carlo engine a different
    geometry; it exists to prove the validator catches engine disagreement
    and must be None in normal use.
    """
    out_dir = Path(out_dir)
    block = scenario.experiment_block("mc-validate")
    dist, geom, det = scenario.beam, scenario.geometry, scenario.detection
    inter = scenario.interaction
    omega = inter.omega_int()
    f_hz = scenario.shifter_frequency()
    if f_hz <= 0:
        raise ConfigError("shifters.f_hz: mc-validate requires f_hz > 0")
    sh = scenario.resolved["shifters"]
    rc = sh["rc_s"] if sh["rc_s"] is not None else 1.0 / (2.4 * f_hz)

    def phi_int(v):
        return interaction_phase(v, omega, inter.length)

    cases = [
        ("none", None),
        (
            "ideal_pair",
            (IdealSawtooth(f=f_hz, sign=1), IdealSawtooth(f=f_hz, sign=-1)),
        ),
        (
            "rc_pair",
            (
                RcRamp(f=f_hz, p=sh["duty"], gamma=sh["gamma_rad"], rc=rc, sign=1),
                RcRamp(f=f_hz, p=sh["duty"], gamma=sh["gamma_rad"], rc=rc, sign=-1),
            ),
        ),
    ]

    rows = []
    for label, pair in cases:
        contrast, phase = complex_fringe_amplitude(phi_int, pair, dist, geom)
        mc = monte_carlo_amplitude(
            phi_int,
            pair,
            dist,
            mc_geometry if mc_geometry is not None else geom,
            block["n_atoms"],
            det.seed,
            reference=phase,
        )
        rows.append(
            McCheckRow(
                case=label,
                quantity="contrast",
                quadrature=contrast,
                monte_carlo=mc.contrast,
                se=mc.contrast_se,
                z=_zscore(mc.contrast - contrast, mc.contrast_se),
            )
        )
        rows.append(
            McCheckRow(
                case=label,
                quantity="phase",
                quadrature=phase,
                monte_carlo=mc.phase,
                se=mc.phase_se,
                z=_zscore(mc.phase - phase, mc.phase_se),
            )
        )
    passed = all(abs(r.z) < 3.0 for r in rows)

    lines = _header_lines(scenario, "mc-validate")
    lines.append("case,quantity,quadrature,monte_carlo,se,z")
    for r in rows:
        lines.append(
            f"{r.case},{r.quantity},{_fmt(r.quadrature)},{_fmt(r.monte_carlo)},"
            f"{_fmt(r.se)},{_fmt(r.z)}"
        )
    csv_path = _write_lines(out_dir / "mc_validate.csv", lines)

    summary = _header_lines(scenario, "mc-validate")
    summary.append(f"n_atoms={block['n_atoms']}")
    summary.append(f"max_abs_z={_fmt(max(abs(r.z) for r in rows))}")
    summary.append(f"result={'PASS' if passed else 'FAIL'}")
    summary_path = _write_lines(out_dir / "mc_validate_summary.txt", summary)
    return McValidateResult(rows, passed, csv_path, summary_path)


@dataclass(frozen=True)
class GyroRunResult:
    telemetry: ServoTelemetry
    final_f: float
    target_f: float
    theta: float
    integral_omega: float
    csv_path: Path
    summary_path: Path


def run_gyro(scenario: Scenario, out_dir) -> GyroRunResult:
    """Closed-loop servo over the configured rotation profile."""
    out_dir = Path(out_dir)
    block = scenario.experiment_block("gyro")
    dist, geom = scenario.beam, scenario.geometry
    if block["profile"] == "constant":
        profile = RotationProfile.constant(block["omega_rad_s"], block["t_total_s"])
    else:
        profile = RotationProfile.ramp(
            block["omega_rad_s"], block["omega_end_rad_s"], block["t_total_s"]
        )
    gain = block["gain_hz_per_rad"]
    if gain is None:
        gain = default_gain(dist.v0, geom.l_shifters)
    state0 = ServoState(f=block["f0_hz"], gain=gain, dt=block["dt_s"])
    telemetry = run_servo(profile, state0, scenario)

    final_f = float(telemetry.f[-1])
    target_f = rotation_to_frequency(
        float(telemetry.omega_in[-1]), geom.k_g, geom.l_g, geom.l_shifters
    )
    theta = float(telemetry.theta[-1])
    integral_omega = profile.integral()

    csv_path = out_dir / "gyro_telemetry.csv"
    telemetry.to_csv(csv_path, header_lines=_header_lines(scenario, "gyro"))

    summary = _header_lines(scenario, "gyro")
    summary += [
        f"final_f_hz={_fmt(final_f)}",
        f"target_f_hz={_fmt(target_f)}",
        f"theta_rad={_fmt(theta)}",
        f"integral_omega_rad={_fmt(integral_omega)}",
    ]
    if target_f != 0.0:
        summary.append(f"f_relative_error={_fmt(final_f / target_f - 1.0)}")
    if integral_omega != 0.0:
        summary.append(f"theta_relative_error={_fmt(theta / integral_omega - 1.0)}")
    summary_path = _write_lines(out_dir / "gyro_summary.txt", summary)
    return GyroRunResult(
        telemetry=telemetry,
        final_f=final_f,
        target_f=target_f,
        theta=theta,
        integral_omega=integral_omega,
        csv_path=csv_path,
        summary_path=summary_path,
    )
