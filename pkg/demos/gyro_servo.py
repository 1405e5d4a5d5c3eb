"""Gyro servo demo: close the loop on an Earth-rate rotation with shot
noise on, then integrate the accumulated angle from the telemetry.

With one-second readouts the loop captures within a few updates and then
rattles around the lock point at the shot-noise level.
"""

import sys
from pathlib import Path

from counterphase.runner import run_gyro
from counterphase.scenario import build_scenario


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent
    out.mkdir(parents=True, exist_ok=True)
    sc = build_scenario({"experiment": "gyro"})
    res = run_gyro(sc, out)
    tel = res.telemetry

    print(f"target pair frequency {res.target_f:.3f} Hz for Earth rate")
    print("capture transient (first 6 updates):")
    for k in range(6):
        print(
            f"  t = {tel.t[k]:5.1f} s  f = {tel.f[k]:8.2f} Hz  "
            f"residual = {tel.residual[k]:+.3f} rad"
        )
    print(f"final f = {res.final_f:.2f} Hz ({res.final_f / res.target_f - 1:+.2%})")
    print(
        f"integrated angle {res.theta:.3e} rad vs true {res.integral_omega:.3e} rad"
    )
    print(f"telemetry in {res.csv_path}")


if __name__ == "__main__":
    main()
