import numpy as np
import pytest

import hema.flight_dynamics as fd
import hema.powertrain as pt
from hema.scheduling import CoeffTable, FanMap

# aircraft-table values used across the suite (SI where applicable)
BETA1 = 0.08e-6   # kg/J  (0.08 kg/MJ)
BETA0 = 0.03      # kg/s
M0 = 42000.0
DRY_MASS = 34000.0


@pytest.fixture(scope="session")
def aero():
    return fd.AeroParams.from_degree_fits(
        a0=0.029, a1_per_deg=0.004, a2_per_deg2=5.3e-4, b0=0.43,
        b1_per_deg=0.11, S=77.3, rho=1.225, grav=9.81,
        alpha_min_deg=-3.9, alpha_max_deg=10.0, n_arrangements=4)


@pytest.fixture(scope="session")
def battery():
    return pt.BatteryParams(U=750.0, R=0.01, E_min=221e6, E_max=939e6)


@pytest.fixture(scope="session")
def limits():
    return pt.PowerLimits(p_gt_min=0.0, p_gt_max=5e6, p_em_min=0.0, p_em_max=2e6)


@pytest.fixture(scope="session")
def fuel_map():
    return pt.FuelMapCoeffs(beta2=0.0, beta1=BETA1, beta0=BETA0)


@pytest.fixture(scope="session")
def loss_map():
    return pt.LossMapCoeffs(kappa2=5e-8, kappa1=1.05, kappa0=0.0)


@pytest.fixture(scope="session")
def fan_map():
    return FanMap.synthetic()


@pytest.fixture(scope="session")
def coeff_table(loss_map, fuel_map):
    return CoeffTable.single_row(loss_map, fuel_map)


@pytest.fixture(scope="session")
def cruise_plan():
    """Four-sample level cruise at 190 m/s, 7000 m."""
    return fd.FlightPlan(10.0, np.full(4, 7000.0), np.full(4, 190.0))


def random_plan(rng, n_stages=6):
    """Smooth random mission segment for property tests."""
    delta = float(rng.uniform(5.0, 20.0))
    v = 120.0 + np.cumsum(rng.uniform(-3.0, 3.0, n_stages + 1)) + rng.uniform(0, 80)
    v = np.clip(v, 80.0, 260.0)
    climb = rng.uniform(-8.0, 8.0, n_stages + 1)
    h = 2000.0 + np.cumsum(climb * delta)
    h = np.clip(h, 0.0, 11000.0)
    return fd.FlightPlan(delta, h, v)
