"""Dual-engine cross-check demo: the deterministic velocity quadrature
against a Monte Carlo atom counter on the same three drive scenarios.

Both engines consume the same distribution, geometry, and waveforms but
share no averaging code, so agreement within jackknife errors is a real
consistency statement, not a tautology.
"""

import sys
from pathlib import Path

from counterphase.runner import run_mc_validate
from counterphase.scenario import build_scenario


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent
    out.mkdir(parents=True, exist_ok=True)
    sc = build_scenario({"experiment": "mc-validate"})
    res = run_mc_validate(sc, out)

    print(f"{'case':<12} {'quantity':<9} {'quadrature':>12} {'monte carlo':>12} {'z':>7}")
    for row in res.rows:
        print(
            f"{row.case:<12} {row.quantity:<9} {row.quadrature:>12.6f} "
            f"{row.monte_carlo:>12.6f} {row.z:>7.2f}"
        )
    print(f"verdict: {'PASS' if res.passed else 'FAIL'} (|z| < 3 on every row)")
    print(f"table in {res.csv_path}")


if __name__ == "__main__":
    main()
