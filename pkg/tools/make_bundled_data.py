#!/usr/bin/env python3
"""Regenerate the bundled synthetic data files under src/hema/data/.

The flight plan is a piecewise-linear climb/cruise/descent profile for a
1-hour, 190 m/s mission; it approximates a typical regional sortie rather
than reproducing any recorded trace.  The fan map
and loss-coefficient table are synthetic stand-ins for proprietary rig
data: monotone, smooth, and scaled to put shaft speeds and motor
efficiencies in plausible ranges.  Re-running this script is deterministic
and must reproduce the committed CSVs byte for byte.
"""

import pathlib

import numpy as np

from hema.flight_dynamics import FlightPlan
from hema.scheduling import CoeffTable, FanMap

DATA = pathlib.Path(__file__).resolve().parents[1] / "src" / "hema" / "data"

# (t, h) and (t, v) anchor points; linear in between.  The climb-rate step
# at t = 120 s makes the per-engine drive power cross the 3 MW line between
# samples instead of creeping through it, which keeps the turbine
# saturation study clean of sliver stages.
H_ANCHORS = [(0.0, 0.0), (120.0, 960.0), (460.0, 7000.0),
             (2700.0, 7000.0), (3180.0, 1000.0), (3600.0, 0.0)]
V_ANCHORS = [(0.0, 150.0), (120.0, 165.0), (460.0, 190.0),
             (2700.0, 190.0), (3180.0, 135.0), (3600.0, 125.0)]
DELTA = 10.0


def write_plan(path):
    t = np.arange(361) * DELTA
    h = np.interp(t, [p[0] for p in H_ANCHORS], [p[1] for p in H_ANCHORS])
    v = np.interp(t, [p[0] for p in V_ANCHORS], [p[1] for p in V_ANCHORS])
    with open(path, "w", newline="") as f:
        f.write("t_s,h_m,v_mps\n")
        for i in range(t.size):
            f.write(f"{t[i]:.10g},{h[i]:.10g},{v[i]:.10g}\n")


def write_fan_map(path):
    FanMap.synthetic().to_csv(path)


def write_coeff_table(path):
    # electric loss coefficients rise with shaft speed (iron/windage heavy
    # at speed); fuel map constant and linear per the aircraft's quoted
    # beta values
    om = np.array([80.0, 140.0, 200.0, 260.0, 320.0, 400.0])
    table = CoeffTable(
        omega=om,
        kappa2=np.array([5.5e-8, 6.5e-8, 8.0e-8, 9.5e-8, 11.0e-8, 12.5e-8]),
        kappa1=np.array([1.028, 1.032, 1.040, 1.052, 1.068, 1.085]),
        kappa0=np.zeros(6),
        beta2=np.zeros(6),
        beta1=np.full(6, 0.08e-6),
        beta0=np.full(6, 0.03),
    )
    table.to_csv(path)


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    write_plan(DATA / "default_plan.csv")
    write_fan_map(DATA / "fan_map.csv")
    write_coeff_table(DATA / "coeff_table.csv")
    # loader round-trip sanity
    plan = FlightPlan.from_csv(DATA / "default_plan.csv")
    assert plan.n_stages == 360
    print(f"wrote plan/fan map/coefficient table under {DATA}")


if __name__ == "__main__":
    main()
