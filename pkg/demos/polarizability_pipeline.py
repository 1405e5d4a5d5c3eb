"""Polarizability pipeline demo: drive the shifters at a fixed frequency,
sweep the interaction voltage, locate the phase zero crossing, and read
the polarizability off the rephasing condition.

The pipeline is blind: every sweep point is a synthetic Poisson scan fit
for its phase, exactly what the command line's `polarizability`
experiment does.
"""

import sys
from pathlib import Path

from counterphase.runner import run_polarizability
from counterphase.scenario import build_scenario


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent
    out.mkdir(parents=True, exist_ok=True)
    sc = build_scenario({"experiment": "polarizability"})
    run = run_polarizability(sc, out)

    print(f"swept {len(run.points)} voltages, dwell {sc.detection.dwell_s} s/point")
    print(f"asymmetry correction applied: {run.phi_error:+.3e} rad")
    print(
        f"zero crossing at V^2 = {run.crossing.v_squared_reph:.1f} "
        f"+- {run.crossing.dv_squared:.1f} volt^2"
    )
    print(f"alpha = {run.result.alpha:.4e} (injected {run.alpha_true:.4e})")
    print(f"relative error {run.relative_error:+.2e}")
    print(f"fractional statistical uncertainty {run.result.frac_uncertainty:.2e}")
    print(f"sweep table in {run.csv_path}")


if __name__ == "__main__":
    main()
