"""Scenario configs: YAML schema, defaults, validation, round-tripping.

A scenario fully determines one simulated experiment: beam, geometry,
interaction cell, shifter drives, detection model, and per-experiment
parameter blocks. Every key has a documented default, so an empty config
is runnable; unknown or invalid keys fail loudly with their dotted path.
The resolved (fully-defaulted) config is echoed into every output file
header, which is what makes reruns byte-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from .constants import GRATING_WAVEVECTOR, TWO_PI
from .errors import ConfigError
from .phases import (
    InteractionRegion,
    InterferometerGeometry,
    VelocityDistribution,
    interaction_phase,
)
from .waveforms import IdealSawtooth, NullWaveform, RcRamp, ShifterGeometry

__all__ = [
    "DetectionSettings",
    "Scenario",
    "EXPERIMENTS",
    "default_config",
    "build_scenario",
    "read_config",
    "load_scenario",
    "save_scenario",
    "apply_overrides",
    "flatten_config",
]

EXPERIMENTS = ("contrast-sweep", "fringe-scan", "polarizability", "mc-validate", "gyro")

_GAMMA_DEFAULT = 0.83 * math.pi


def default_config() -> dict:
    """Fresh copy of the fully-defaulted configuration tree."""
    return {
        "experiment": None,
        "beam": {"v0_m_s": 1722.6, "sigma_over_v0": 0.04, "trunc_k": 5.0},
        "geometry": {
            "l_shifters_m": 1.0,
            "l_g_m": 0.66,
            "k_g_rad_m": GRATING_WAVEVECTOR,
        },
        "interaction": {
            "d_m": 2.0e-3,
            "l_int_m": 0.1,
            "alpha_si": 2.68e-39,
            "v_volts": 368.0,
        },
        "shifters": {
            "kind": "ideal",
            "f_hz": 17000.0,
            "sign": 1,
            "scale": 1.0,
            "scale_2": None,
            "gamma_rad": _GAMMA_DEFAULT,
            "rc_s": None,
            "duty": 0.9,
            "offset_s": 0.0,
        },
        "cylinder": {
            "radius_m": 0.5e-3,
            "ground_distance_m": 1.5e-3,
            "path_separation_m": 50.0e-6,
            "path_distance_m": 1.0e-3,
        },
        "detection": {
            "dwell_s": 0.0625,
            "flux_hz": 212.4,
            "seed": 12345,
            "base_contrast": 0.2,
            "n_z": 32,
            "z_span_periods": 2.0,
            "noise": True,
        },
        "contrast_sweep": {
            "f_hz_list": [0.0, 17000.0, 40000.0],
            "phi_max_rad": 160.0,
            "phi_step_rad": 0.25,
        },
        "polarizability": {
            "window": 10,
            "n_points": 21,
            "phase_span_rad": 16.0,
            "v2_min_volt2": None,
            "v2_max_volt2": None,
        },
        "mc_validate": {"n_atoms": 1000000},
        "gyro": {
            "profile": "constant",
            "omega_rad_s": 7.29e-5,
            "omega_end_rad_s": None,
            # One-second updates: at the default flux a shorter readout has
            # too few counts to fit a phase when counting noise is on.
            "t_total_s": 60.0,
            "dt_s": 1.0,
            "gain_hz_per_rad": None,
            "f0_hz": 0.0,
        },
    }


# Keys that may be null (resolved downstream or genuinely optional).
_NULLABLE = {
    "experiment",
    "shifters.scale_2",
    "shifters.rc_s",
    "polarizability.v2_min_volt2",
    "polarizability.v2_max_volt2",
    "gyro.omega_end_rad_s",
    "gyro.gain_hz_per_rad",
}
_INT_KEYS = {
    "shifters.sign",
    "detection.seed",
    "detection.n_z",
    "polarizability.window",
    "polarizability.n_points",
    "mc_validate.n_atoms",
}
_BOOL_KEYS = {"detection.noise"}
_STR_KEYS = {"experiment", "shifters.kind", "gyro.profile"}
_LIST_KEYS = {"contrast_sweep.f_hz_list"}


def _merge(base: dict, override: dict, prefix: str = "") -> None:
    for key, value in override.items():
        path = f"{prefix}{key}"
        if key not in base:
            raise ConfigError(f"unknown key: {path}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{path}: expected a mapping of sub-keys")
            _merge(base[key], value, prefix=f"{path}.")
        else:
            base[key] = value


def _coerce(cfg: dict) -> None:
    """Normalize leaf types in place so equal configs compare equal."""
    for path, value in flatten_config(cfg):
        if value is None:
            if path in _NULLABLE:
                continue
            raise ConfigError(f"{path}: must not be null")
        if path in _STR_KEYS:
            if not isinstance(value, str):
                raise ConfigError(f"{path}: expected a string, got {value!r}")
            continue
        if path in _BOOL_KEYS:
            if not isinstance(value, bool):
                raise ConfigError(f"{path}: expected true/false, got {value!r}")
            continue
        if path in _LIST_KEYS:
            if not isinstance(value, list) or not value:
                raise ConfigError(f"{path}: expected a non-empty list of numbers")
            _set_path(cfg, path, [_as_float(path, x) for x in value])
            continue
        if path in _INT_KEYS:
            _set_path(cfg, path, _as_int(path, value))
            continue
        _set_path(cfg, path, _as_float(path, value))


def _as_float(path: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _as_int(path: str, value) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    return value


def _set_path(cfg: dict, path: str, value) -> None:
    node = cfg
    parts = path.split(".")
    for part in parts[:-1]:
        node = node[part]
    node[parts[-1]] = value


def flatten_config(cfg: dict, prefix: str = "") -> list[tuple[str, object]]:
    out = []
    for key in cfg:
        path = f"{prefix}{key}"
        if isinstance(cfg[key], dict):
            out.extend(flatten_config(cfg[key], prefix=f"{path}."))
        else:
            out.append((path, cfg[key]))
    return out


def _fail(path: str, message: str):
    raise ConfigError(f"{path}: {message}")


def _positive(cfg_value: float, path: str) -> None:
    if not cfg_value > 0:
        _fail(path, f"must be > 0, got {cfg_value!r}")


def _validate(cfg: dict) -> None:
    if cfg["experiment"] is not None and cfg["experiment"] not in EXPERIMENTS:
        _fail("experiment", f"unknown experiment {cfg['experiment']!r}; "
              f"known: {', '.join(EXPERIMENTS)}")

    for path in (
        "beam.v0_m_s", "beam.sigma_over_v0",
        "geometry.l_shifters_m", "geometry.l_g_m", "geometry.k_g_rad_m",
        "interaction.d_m", "interaction.l_int_m", "interaction.alpha_si",
        "detection.dwell_s", "detection.flux_hz",
        "cylinder.radius_m", "cylinder.ground_distance_m",
        "cylinder.path_separation_m", "cylinder.path_distance_m",
        "contrast_sweep.phi_max_rad", "contrast_sweep.phi_step_rad",
        "polarizability.phase_span_rad",
        "gyro.t_total_s", "gyro.dt_s",
        "shifters.scale", "shifters.gamma_rad",
    ):
        _positive(_get_path(cfg, path), path)

    beam = cfg["beam"]
    if beam["trunc_k"] < 3:
        _fail("beam.trunc_k", "support must span at least 3 sigma")
    if beam["v0_m_s"] * (1 - beam["trunc_k"] * beam["sigma_over_v0"]) <= 0:
        _fail("beam.sigma_over_v0", "truncated support reaches non-positive speeds")

    sh = cfg["shifters"]
    if sh["kind"] not in ("ideal", "rc", "none"):
        _fail("shifters.kind", f"must be one of ideal, rc, none; got {sh['kind']!r}")
    if sh["f_hz"] < 0:
        _fail("shifters.f_hz", "must be >= 0")
    if sh["sign"] not in (-1, 1):
        _fail("shifters.sign", "must be +1 or -1")
    if sh["scale_2"] is not None and sh["scale_2"] <= 0:
        _fail("shifters.scale_2", "must be > 0 when set")
    if sh["rc_s"] is not None and sh["rc_s"] <= 0:
        _fail("shifters.rc_s", "must be > 0 when set")
    if not 0.0 < sh["duty"] < 1.0:
        _fail("shifters.duty", "must satisfy 0 < duty < 1")
    if sh["kind"] == "rc" and sh["f_hz"] == 0:
        _fail("shifters.f_hz", "rc shifters require f_hz > 0")

    if cfg["interaction"]["v_volts"] < 0:
        _fail("interaction.v_volts", "must be >= 0")

    cyl = cfg["cylinder"]
    if not cyl["radius_m"] < cyl["ground_distance_m"]:
        _fail("cylinder.radius_m", "must be smaller than ground_distance_m")

    det = cfg["detection"]
    if det["seed"] < 0:
        _fail("detection.seed", "must be >= 0")
    if not 0.0 < det["base_contrast"] <= 1.0:
        _fail("detection.base_contrast", "must lie in (0, 1]")
    if det["n_z"] < 8:
        _fail("detection.n_z", "need at least 8 scan points")
    if det["z_span_periods"] * (det["n_z"] - 1) / det["n_z"] < 1.0 - 1e-12:
        _fail("detection.z_span_periods", "scan must cover at least one fringe period")

    for x in cfg["contrast_sweep"]["f_hz_list"]:
        if x < 0:
            _fail("contrast_sweep.f_hz_list", "frequencies must be >= 0")
    if cfg["contrast_sweep"]["phi_step_rad"] >= cfg["contrast_sweep"]["phi_max_rad"]:
        _fail("contrast_sweep.phi_step_rad", "step must be smaller than phi_max_rad")

    pol = cfg["polarizability"]
    if pol["window"] < 3:
        _fail("polarizability.window", "must be >= 3")
    if pol["n_points"] < 3:
        _fail("polarizability.n_points", "must be >= 3")
    if pol["v2_min_volt2"] is not None and pol["v2_min_volt2"] < 0:
        _fail("polarizability.v2_min_volt2", "must be >= 0")
    if (
        pol["v2_min_volt2"] is not None
        and pol["v2_max_volt2"] is not None
        and not pol["v2_min_volt2"] < pol["v2_max_volt2"]
    ):
        _fail("polarizability.v2_max_volt2", "must exceed v2_min_volt2")

    if cfg["mc_validate"]["n_atoms"] < 10000:
        _fail("mc_validate.n_atoms", "must be >= 10000")

    gy = cfg["gyro"]
    if gy["profile"] not in ("constant", "ramp"):
        _fail("gyro.profile", f"must be constant or ramp; got {gy['profile']!r}")
    if gy["profile"] == "ramp" and gy["omega_end_rad_s"] is None:
        _fail("gyro.omega_end_rad_s", "required for a ramp profile")
    if gy["gain_hz_per_rad"] is not None and gy["gain_hz_per_rad"] <= 0:
        _fail("gyro.gain_hz_per_rad", "must be > 0 when set")
    if gy["dt_s"] > gy["t_total_s"]:
        _fail("gyro.dt_s", "must not exceed t_total_s")
    if gy["f0_hz"] < 0:
        _fail("gyro.f0_hz", "must be >= 0")


def _get_path(cfg: dict, path: str):
    node = cfg
    for part in path.split("."):
        node = node[part]
    return node


@dataclass(frozen=True)
class DetectionSettings:
    dwell_s: float
    flux_hz: float
    seed: int
    base_contrast: float
    n_z: int
    z_span_periods: float
    noise: bool

    def z_grid(self, k_g: float) -> np.ndarray:
        """Evenly spaced grating offsets covering the configured span."""
        span = self.z_span_periods * TWO_PI / k_g
        return np.linspace(0.0, span, self.n_z, endpoint=False)


@dataclass(frozen=True)
class Scenario:
    beam: VelocityDistribution
    geometry: InterferometerGeometry
    interaction: InteractionRegion
    detection: DetectionSettings
    resolved: dict = field(repr=False)

    def experiment_block(self, name: str) -> dict:
        return self.resolved[name.replace("-", "_")]

    def shifter_frequency(self) -> float:
        return self.resolved["shifters"]["f_hz"]

    def shifter_pair(self, f_hz: float | None = None):
        """The configured waveform pair at frequency f_hz (default: config f).

        Returns None when the shifters are off (kind none or zero
        frequency). The second shifter mirrors the first's sign, with the
        configured amplitude/offset deviations applied.
        """
        sh = self.resolved["shifters"]
        if f_hz is None:
            f_hz = sh["f_hz"]
        if sh["kind"] == "none" or f_hz == 0.0:
            return None
        if sh["kind"] == "ideal":
            scale_2 = sh["scale_2"] if sh["scale_2"] is not None else sh["scale"]
            return (
                IdealSawtooth(f=f_hz, sign=sh["sign"], scale=sh["scale"]),
                IdealSawtooth(
                    f=f_hz, sign=-sh["sign"], scale=scale_2, t0=sh["offset_s"]
                ),
            )
        rc = sh["rc_s"] if sh["rc_s"] is not None else 1.0 / (2.4 * f_hz)
        return (
            RcRamp(f=f_hz, p=sh["duty"], gamma=sh["gamma_rad"], rc=rc, sign=sh["sign"]),
            RcRamp(
                f=f_hz,
                p=sh["duty"],
                gamma=sh["gamma_rad"],
                rc=rc,
                sign=-sh["sign"],
                t0=sh["offset_s"],
            ),
        )

    def cylinder(self) -> ShifterGeometry:
        cyl = self.resolved["cylinder"]
        return ShifterGeometry(
            radius=cyl["radius_m"],
            ground_distance=cyl["ground_distance_m"],
            path_separation=cyl["path_separation_m"],
            path_distance=cyl["path_distance_m"],
        )

    def phi_int_v0(self) -> float:
        """Interaction phase at the mean speed for the configured voltage."""
        return interaction_phase(
            self.beam.v0, self.interaction.omega_int(), self.interaction.length
        )


def build_scenario(raw: dict | None) -> Scenario:
    """Merge a raw config mapping over the defaults, validate, construct."""
    cfg = default_config()
    if raw is not None:
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a mapping")
        _merge(cfg, raw)
    _coerce(cfg)
    _validate(cfg)

    # Resolve the deferred rc default so the echoed config is concrete.
    sh = cfg["shifters"]
    if sh["kind"] == "rc" and sh["rc_s"] is None:
        sh["rc_s"] = 1.0 / (2.4 * sh["f_hz"])

    try:
        beam = VelocityDistribution(
            v0=cfg["beam"]["v0_m_s"],
            sigma_v=cfg["beam"]["sigma_over_v0"] * cfg["beam"]["v0_m_s"],
            trunc_k=cfg["beam"]["trunc_k"],
        )
        geometry = InterferometerGeometry(
            l_shifters=cfg["geometry"]["l_shifters_m"],
            l_g=cfg["geometry"]["l_g_m"],
            k_g=cfg["geometry"]["k_g_rad_m"],
        )
        interaction = InteractionRegion(
            voltage=cfg["interaction"]["v_volts"],
            gap=cfg["interaction"]["d_m"],
            length=cfg["interaction"]["l_int_m"],
            alpha=cfg["interaction"]["alpha_si"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    detection = DetectionSettings(
        dwell_s=cfg["detection"]["dwell_s"],
        flux_hz=cfg["detection"]["flux_hz"],
        seed=cfg["detection"]["seed"],
        base_contrast=cfg["detection"]["base_contrast"],
        n_z=cfg["detection"]["n_z"],
        z_span_periods=cfg["detection"]["z_span_periods"],
        noise=cfg["detection"]["noise"],
    )
    return Scenario(
        beam=beam,
        geometry=geometry,
        interaction=interaction,
        detection=detection,
        resolved=cfg,
    )


def read_config(path) -> dict:
    """Raw (unvalidated) config mapping from a YAML file."""
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file does not parse: {exc}") from exc
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    return raw


def load_scenario(path) -> Scenario:
    return build_scenario(read_config(path))


def save_scenario(scenario: Scenario, path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(scenario.resolved, fh, sort_keys=True)


def apply_overrides(raw: dict, assignments) -> dict:
    """Fold `--set dotted.key=value` assignments into a raw config dict."""
    for item in assignments:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        try:
            parsed = yaml.safe_load(value)
        except yaml.YAMLError as exc:
            raise ConfigError(f"override value does not parse: {item!r}") from exc
        node = raw
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override path conflicts with a scalar: {key}")
        node[parts[-1]] = parsed
    return raw
