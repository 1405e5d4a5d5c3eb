"""Command-line scenario runner.

    counterphase <experiment> [--config FILE] [--out DIR] [--set KEY=VALUE ...]

Experiments: contrast-sweep, fringe-scan, polarizability, mc-validate,
gyro. Without --config all documented defaults apply; --set overrides
individual dotted keys (values parsed as YAML). Exit codes: 0 success,
2 config error, 3 numerical error, 4 failed validation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError, NumericsError, ValidationFailure
from .runner import (
    TOOL_VERSION,
    run_contrast_sweep,
    run_fringe_scan,
    run_gyro,
    run_mc_validate,
    run_polarizability,
)
from .scenario import EXPERIMENTS, apply_overrides, build_scenario, read_config

__all__ = ["entry", "main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICS = 3
EXIT_VALIDATION = 4

_RUNNERS = {
    "contrast-sweep": run_contrast_sweep,
    "fringe-scan": run_fringe_scan,
    "polarizability": run_polarizability,
    "mc-validate": run_mc_validate,
    "gyro": run_gyro,
}

_HELP = {
    "contrast-sweep": "contrast and phase versus interaction phase, per ramp frequency",
    "fringe-scan": "synthesize and fit one detector scan",
    "polarizability": "voltage sweep, zero crossing, polarizability extraction",
    "mc-validate": "cross-check the quadrature engine against Monte Carlo",
    "gyro": "closed-loop rotation servo and angle integration",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="counterphase",
        description="Simulated three-grating interferometer with ramp-pair "
        "dispersion compensation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {TOOL_VERSION}")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=_HELP[name])
        p.add_argument("--config", type=Path, default=None, help="scenario YAML file")
        p.add_argument(
            "--out", type=Path, default=Path("."), help="output directory (default: cwd)"
        )
        p.add_argument(
            "--set",
            action="append",
            default=[],
            dest="overrides",
            metavar="KEY=VALUE",
            help="override a dotted config key, e.g. --set shifters.f_hz=40000",
        )
    return parser


def entry(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        raw = read_config(args.config) if args.config is not None else {}
        apply_overrides(raw, args.overrides)
        configured = raw.get("experiment")
        if configured is not None and configured != args.experiment:
            raise ConfigError(
                f"experiment: config names {configured!r} but the "
                f"{args.experiment!r} subcommand was invoked"
            )
        raw["experiment"] = args.experiment
        scenario = build_scenario(raw)
        args.out.mkdir(parents=True, exist_ok=True)
        result = _RUNNERS[args.experiment](scenario, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericsError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICS
    except ValidationFailure as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    print(Path(result.summary_path).read_text(), end="")
    if args.experiment == "mc-validate" and not result.passed:
        print(
            "validation failed: Monte Carlo disagrees with quadrature "
            "(see mc_validate.csv)",
            file=sys.stderr,
        )
        return EXIT_VALIDATION
    return EXIT_OK


def main() -> None:
    sys.exit(entry())


if __name__ == "__main__":
    main()
