import numpy as np
import pytest

import hema.powertrain as pt
from hema.errors import InfeasibleBatteryDraw, OutOfRange


def test_fuel_rate_table_values(fuel_map):
    # idle burn; marginal slope at table values
    assert pt.eval_fuel_rate(0.0, fuel_map) == pytest.approx(0.03)
    assert pt.eval_fuel_rate(5e6, fuel_map) == pytest.approx(0.43)
    assert pt.eval_fuel_rate(1e6, fuel_map) == pytest.approx(0.11)


def test_fuel_rate_quadratic_term():
    c = pt.FuelMapCoeffs(beta2=1e-14, beta1=0.08e-6, beta0=0.03)
    assert pt.eval_fuel_rate(2e6, c) == pytest.approx(1e-14 * 4e12 + 0.16 + 0.03)


def test_electrical_draw_values():
    lossless = pt.LossMapCoeffs(kappa2=0.0, kappa1=1.0, kappa0=0.0)
    assert pt.eval_electrical_draw(0.0, lossless) == 0.0
    c = pt.LossMapCoeffs(kappa2=2e-8, kappa1=1.05, kappa0=5e3)
    assert pt.eval_electrical_draw(1e6, c) == pytest.approx(1.075e6)


def test_electrical_draw_vertex_is_minimum():
    c = pt.LossMapCoeffs(kappa2=2e-8, kappa1=1.0, kappa0=1e3)
    v = -c.kappa1 / (2.0 * c.kappa2)
    hv = pt.eval_electrical_draw(v, c)
    for eps in (1.0, 1e3, 1e5):
        assert pt.eval_electrical_draw(v + eps, c) > hv
        assert pt.eval_electrical_draw(v - eps, c) > hv


def test_coefficient_invariants_enforced():
    with pytest.raises(ValueError):
        pt.FuelMapCoeffs(beta2=-1e-15, beta1=1e-7, beta0=0.0)
    with pytest.raises(ValueError):
        pt.FuelMapCoeffs(beta2=0.0, beta1=0.0, beta0=0.0)
    with pytest.raises(ValueError):
        pt.LossMapCoeffs(kappa2=-1e-12, kappa1=1.0, kappa0=0.0)
    with pytest.raises(ValueError):
        pt.BatteryParams(U=750.0, R=0.0, E_min=0.0, E_max=1.0)
    with pytest.raises(ValueError):
        pt.BatteryParams(U=750.0, R=0.01, E_min=2.0, E_max=1.0)
    with pytest.raises(ValueError):
        pt.PowerLimits(p_gt_min=1.0, p_gt_max=0.0, p_em_min=0.0, p_em_max=1.0)


def test_battery_power_zero_and_boundary(battery):
    lossless = pt.LossMapCoeffs(kappa2=0.0, kappa1=1.0, kappa0=0.0)
    assert pt.battery_power(0.0, lossless, battery) == 0.0
    # h exactly at the deliverable-power dome: g = U^2/(2R)
    p_dome = battery.max_bus_power
    assert pt.battery_power(p_dome, lossless, battery) == pytest.approx(
        battery.U ** 2 / (2.0 * battery.R))


def test_battery_power_infeasible_draw(battery):
    lossless = pt.LossMapCoeffs(kappa2=0.0, kappa1=1.0, kappa0=0.0)
    with pytest.raises(InfeasibleBatteryDraw):
        pt.battery_power(battery.max_bus_power * 1.01, lossless, battery)


def test_battery_power_boundary_clamp(battery):
    # a hair beyond the dome is clamped, not raised
    lossless = pt.LossMapCoeffs(kappa2=0.0, kappa1=1.0, kappa0=0.0)
    eps = battery.max_bus_power * 1e-13
    g = pt.battery_power(battery.max_bus_power + eps, lossless, battery)
    assert g == pytest.approx(battery.U ** 2 / (2.0 * battery.R))


def test_battery_inverse_closed_forms(battery):
    # affine-branch closed form: g^-1(p) = p - (R/U^2) p^2 for k=(0,1,0)
    c = pt.LossMapCoeffs(kappa2=0.0, kappa1=1.0, kappa0=0.0)
    for p_b in (0.0, 1e5, 1e6, 5e6):
        expect = p_b - battery.R / battery.U ** 2 * p_b ** 2
        assert pt.battery_inverse(p_b, c, battery) == pytest.approx(expect)
    cq = pt.LossMapCoeffs(kappa2=3e-8, kappa1=1.0, kappa0=0.0)
    assert pt.battery_inverse(0.0, cq, battery) == pytest.approx(0.0, abs=1e-9)


def test_battery_inverse_out_of_range(battery):
    cq = pt.LossMapCoeffs(kappa2=3e-8, kappa1=1.0, kappa0=0.0)
    with pytest.raises(OutOfRange):
        pt.battery_inverse(-1e9, cq, battery)


@pytest.mark.parametrize("loss", [
    pt.LossMapCoeffs(kappa2=5e-8, kappa1=1.05, kappa0=0.0),
    pt.LossMapCoeffs(kappa2=0.0, kappa1=1.02, kappa0=4e3),
    pt.LossMapCoeffs(kappa2=2e-8, kappa1=0.98, kappa0=1e3),
])
def test_battery_roundtrip_both_branches(loss, battery, limits):
    rng = np.random.default_rng(11)
    lo = pt.effective_em_lower_bound(loss, limits)
    x = rng.uniform(lo, limits.p_em_max, 1000)
    fwd = pt.battery_power(x, loss, battery)
    back = np.array([pt.battery_inverse(p, loss, battery) for p in fwd])
    assert np.all(np.abs(back - x) <= 1e-9 * np.maximum(1.0, np.abs(x)))
    grid = np.linspace(fwd.min(), fwd.max(), 100)
    again = pt.battery_power(
        np.array([pt.battery_inverse(p, loss, battery) for p in grid]),
        loss, battery)
    assert np.all(np.abs(again - grid) <= 1e-9 * np.maximum(1.0, np.abs(grid)))


def test_effective_em_lower_bound_cases(limits):
    affine = pt.LossMapCoeffs(kappa2=0.0, kappa1=1.0, kappa0=0.0)
    assert pt.effective_em_lower_bound(affine, limits) == -limits.p_em_max
    shallow = pt.LossMapCoeffs(kappa2=2e-8, kappa1=1.0, kappa0=0.0)
    assert pt.effective_em_lower_bound(shallow, limits) == -2e6
    steep = pt.LossMapCoeffs(kappa2=1e-6, kappa1=1.0, kappa0=0.0)
    assert pt.effective_em_lower_bound(steep, limits) == pytest.approx(-0.5e6)


def test_maps_midpoint_convexity():
    rng = np.random.default_rng(3)
    for _ in range(200):
        fc = pt.FuelMapCoeffs(beta2=rng.uniform(0, 1e-13),
                              beta1=rng.uniform(1e-8, 2e-7),
                              beta0=rng.uniform(0, 0.1))
        lc = pt.LossMapCoeffs(kappa2=rng.uniform(0, 2e-7),
                              kappa1=rng.uniform(0.5, 1.5),
                              kappa0=rng.uniform(0, 1e4))
        x, y = rng.uniform(-5e6, 5e6, 2)
        mid = 0.5 * (x + y)
        assert pt.eval_fuel_rate(mid, fc) <= \
            0.5 * (pt.eval_fuel_rate(x, fc) + pt.eval_fuel_rate(y, fc)) + 1e-9
        assert pt.eval_electrical_draw(mid, lc) <= \
            0.5 * (pt.eval_electrical_draw(x, lc) + pt.eval_electrical_draw(y, lc)) + 1e-9


def test_battery_power_monotone_convex_on_branch(loss_map, battery, limits):
    lo = pt.effective_em_lower_bound(loss_map, limits)
    x = np.linspace(lo, limits.p_em_max, 400)
    g = pt.battery_power(x, loss_map, battery)
    slopes = np.diff(g) / np.diff(x)
    assert np.all(slopes >= -1e-12)          # non-decreasing
    assert np.all(np.diff(slopes) >= -1e-9)  # convex


def test_battery_inverse_concave_increasing(loss_map, battery, limits):
    lo = pt.effective_em_lower_bound(loss_map, limits)
    img = pt.battery_power(np.array([lo, limits.p_em_max]), loss_map, battery)
    p = np.linspace(img[0], img[1], 400)
    inv = np.array([pt.battery_inverse(v, loss_map, battery) for v in p])
    slopes = np.diff(inv) / np.diff(p)
    assert np.all(slopes > 0)
    assert np.all(np.diff(slopes) <= 1e-9)   # concave


def test_battery_delivers_at_least_bus_power(loss_map, battery, limits):
    rng = np.random.default_rng(5)
    x = rng.uniform(pt.effective_em_lower_bound(loss_map, limits),
                    limits.p_em_max, 500)
    h = pt.eval_electrical_draw(x, loss_map)
    g = pt.battery_power(x, loss_map, battery)
    assert np.all(g >= h - 1e-9)
    pos = h > 0
    assert np.all(g[pos] > h[pos])
