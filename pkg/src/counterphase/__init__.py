"""Dispersion-compensated three-grating interferometer simulation.

A pair of opposed sawtooth phase shifters imprints a velocity-dependent
counter phase -2*pi*f*L/v on an atom beam, cancelling the 1/v dispersion
of an interaction phase so fringe contrast survives at large phase. This
package simulates the fringe formation (quadrature + Monte Carlo), the
measurement pipeline (scan fitting, voltage sweeps, polarizability
extraction), the ramp-asymmetry systematic, and the closed-loop gyroscope
mode, with a config-driven CLI for reproducible runs.
"""

from .errors import (
    ConfigError,
    FitError,
    NumericsError,
    QuadratureError,
    RangeError,
    ServoDivergenceError,
    ValidationFailure,
)
from .estimate import (
    CrossingFit,
    FringeFit,
    PhaseSweepPoint,
    PolarizabilityResult,
    alpha_fractional_uncertainty,
    correct_asymmetry,
    extract_alpha,
    fit_fringe,
    run_voltage_sweep,
    zero_crossing_fit,
)
from .fringe import (
    DetectorScan,
    FringeObservable,
    McAmplitude,
    complex_fringe_amplitude,
    gaussian_envelope,
    monte_carlo_amplitude,
    synthesize_scan,
)
from .gyro import (
    RotationProfile,
    ServoState,
    ServoTelemetry,
    rotation_to_frequency,
    run_servo,
)
from .phases import (
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
from .runner import (
    TOOL_VERSION,
    run_contrast_sweep,
    run_fringe_scan,
    run_gyro,
    run_mc_validate,
    run_polarizability,
)
from .scenario import Scenario, build_scenario, load_scenario, save_scenario
from .waveforms import (
    IdealSawtooth,
    NullWaveform,
    RcRamp,
    ShifterGeometry,
    Waveform,
    asymmetry_error,
    counter_phase,
    cylinder_phase,
    first_harmonic,
    optimize_rc_fidelity,
    pair_sum_phase,
    phase_at,
)

__version__ = TOOL_VERSION

__all__ = [
    "ConfigError",
    "NumericsError",
    "QuadratureError",
    "FitError",
    "RangeError",
    "ServoDivergenceError",
    "ValidationFailure",
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
    "IdealSawtooth",
    "RcRamp",
    "NullWaveform",
    "Waveform",
    "ShifterGeometry",
    "phase_at",
    "counter_phase",
    "pair_sum_phase",
    "asymmetry_error",
    "first_harmonic",
    "cylinder_phase",
    "optimize_rc_fidelity",
    "FringeObservable",
    "DetectorScan",
    "McAmplitude",
    "complex_fringe_amplitude",
    "gaussian_envelope",
    "synthesize_scan",
    "monte_carlo_amplitude",
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
    "RotationProfile",
    "ServoState",
    "ServoTelemetry",
    "rotation_to_frequency",
    "run_servo",
    "Scenario",
    "build_scenario",
    "load_scenario",
    "save_scenario",
    "run_contrast_sweep",
    "run_fringe_scan",
    "run_polarizability",
    "run_mc_validate",
    "run_gyro",
    "TOOL_VERSION",
]
