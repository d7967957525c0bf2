"""Exhaustive reference for small horizons.

Enumerates gridded motor-power sequences against the original nonconvex
formulation: equality mass/SOC dynamics, the power link
P_gt,i = P_drv,i(m_i) - P_em,i with drive power evaluated at the simulated
mass, and hard box bounds.  Completely independent of the interior-point
path: no relaxation, no epigraph variable, forward battery map only.

Cost grows as grid^N, so this is a validation oracle for N <= 4 with
coarse grids, guarded by an explicit enumeration budget.
"""

from __future__ import annotations

import numpy as np

from ..errors import OracleTooLarge
from .problem import OcpProblem

# numerical guards at solver-tolerance scale so exact-boundary optima
# are not excluded by rounding; they do not weaken the oracle materially
_BOUND_EPS_REL = 1e-9


def _grids(p: OcpProblem, grid_size):
    if np.isscalar(grid_size):
        sizes = [int(grid_size)] * p.N
    else:
        sizes = [int(g) for g in grid_size]
        if len(sizes) != p.N:
            raise ValueError("grid_size sequence must have one entry per stage")
    if any(g < 2 for g in sizes):
        raise ValueError("grids need at least 2 points")
    return [np.linspace(p.stages.p_em_min_eff[i], p.limits.p_em_max, sizes[i])
            for i in range(p.N)]


def brute_force_reference(p: OcpProblem, grid_size=50,
                          budget: int = 2_000_000) -> float:
    """Best feasible objective (kg) over all gridded motor-power sequences.

    Returns +inf when no grid path is feasible.  Raises OracleTooLarge when
    the enumeration would exceed `budget` path-stages.
    """
    grids = _grids(p, grid_size)
    sizes = [g.size for g in grids]
    paths = int(np.prod(sizes))
    if paths * p.N > budget:
        raise OracleTooLarge(
            f"{paths} paths x {p.N} stages exceeds budget {budget}")

    idx = np.indices(sizes).reshape(p.N, paths)
    st = p.stages
    b = p.battery
    lim = p.limits
    n_arr = p.n_arrangements
    delta = p.delta
    half_scale = b.U * b.U / (2.0 * b.R)

    eps_p = _BOUND_EPS_REL * lim.p_gt_max
    eps_e = _BOUND_EPS_REL * b.E_max

    m = np.full(paths, p.m0)
    E = np.full(paths, p.E0)
    feas = np.ones(paths, dtype=bool)
    for i in range(p.N):
        pem = grids[i][idx[i]]
        demand = (st.eta2[i] * m + st.eta1[i]) * m + st.eta0[i]
        pgt = demand - pem
        feas &= (pgt >= lim.p_gt_min - eps_p) & (pgt <= lim.p_gt_max + eps_p)
        h = (st.kappa2[i] * pem + st.kappa1[i]) * pem + st.kappa0[i]
        arg = 1.0 - h / (0.5 * half_scale)
        feas &= arg >= 0.0
        pb = half_scale * (1.0 - np.sqrt(np.maximum(arg, 0.0)))
        E = E - pb * delta
        feas &= (E >= b.E_min - eps_e) & (E <= b.E_max + eps_e)
        fuel = (st.beta2[i] * pgt + st.beta1[i]) * pgt + st.beta0[i]
        m = m - n_arr * fuel * delta

    obj = p.m0 - m - p.lam * p.n_arrangements * E
    obj[~feas] = np.inf
    return float(np.min(obj))


def oracle_grid_slack(p: OcpProblem, grid_size=50) -> float:
    """Upper bound (kg) on the oracle's optimality gap from grid resolution.

    First-order fuel sensitivity to moving each stage's motor power by one
    grid spacing (rounding direction can be forced by an active turbine
    bound), with a small allowance for the mass-trajectory feedback.
    """
    grids = _grids(p, grid_size)
    st = p.stages
    slack = 0.0
    for i in range(p.N):
        spacing = grids[i][1] - grids[i][0]
        fprime = st.beta1[i] + 2.0 * st.beta2[i] * p.limits.p_gt_max
        slack += p.n_arrangements * p.delta * fprime * spacing
    return slack * (1.0 + 1e-3)


def random_instance(rng: np.random.Generator) -> OcpProblem:
    """Random small assembled problem for solver-vs-oracle cross-checks.

    Instances are built feasible by construction: stage demands stay well
    inside the combined power capacity, the SOC band is generous relative
    to the worst-case drain over the short horizon, and windmilling-capable
    instances keep negative demands coverable.  Both loss-map branches
    (kappa2 = 0 and > 0), quadratic fuel maps and terminal-SOC weights are
    all exercised.
    """
    from .problem import assemble
    from .. import powertrain as pt2
    from ..powertrain import BatteryParams, PowerLimits, battery_power
    from ..scheduling import StageCoefficients

    n = int(rng.integers(1, 4))
    delta = float(rng.uniform(5.0, 30.0))
    n_arr = int(rng.choice([1, 4]))
    m0 = float(rng.uniform(0.8, 1.2) * 42000.0)

    # voltage/resistance kept in a range where the largest possible bus
    # draw stays inside the deliverable-power dome U^2/4R
    battery = BatteryParams(U=float(rng.uniform(700.0, 900.0)),
                            R=float(rng.uniform(0.005, 0.015)),
                            E_min=50e6, E_max=2000e6)
    e0 = float(rng.uniform(800e6, 1200e6))
    p_gt_max = float(rng.uniform(4e6, 6e6))
    p_em_max = float(rng.uniform(1e6, 3e6))
    windmill = bool(rng.random() < 0.4)
    limits = PowerLimits(p_gt_min=0.0, p_gt_max=p_gt_max,
                         p_em_min=-p_em_max if windmill else 0.0,
                         p_em_max=p_em_max)

    arrays = {k: np.zeros(n) for k in
              ("eta2", "eta1", "eta0", "kappa2", "kappa1", "kappa0",
               "beta2", "beta1", "beta0", "omega",
               "p_em_min_eff", "p_b_min", "p_b_max")}
    for i in range(n):
        k2 = 0.0 if rng.random() < 0.3 else float(rng.uniform(1e-8, 1e-7))
        k1 = float(rng.uniform(0.95, 1.15))
        k0 = float(rng.uniform(0.0, 2e4))
        loss = pt2.LossMapCoeffs(kappa2=k2, kappa1=k1, kappa0=k0)
        b2 = 0.0 if rng.random() < 0.5 else float(rng.uniform(1e-15, 2e-14))
        arrays["kappa2"][i], arrays["kappa1"][i], arrays["kappa0"][i] = k2, k1, k0
        arrays["beta2"][i] = b2
        arrays["beta1"][i] = float(rng.uniform(5e-8, 1.2e-7))
        arrays["beta0"][i] = float(rng.uniform(0.01, 0.05))
        arrays["omega"][i] = float(rng.uniform(100.0, 400.0))

        if windmill and rng.random() < 0.5:
            demand = float(rng.uniform(-0.4, -0.05) * p_em_max)
        else:
            demand = float(rng.uniform(0.2, 0.75) * (p_gt_max + 0.5 * p_em_max))
        eta2 = float(rng.uniform(5e-5, 5e-4)) / n_arr
        vertex = float(rng.uniform(1000.0, 8000.0))
        eta1 = -2.0 * eta2 * vertex
        eta0 = demand - (eta2 * m0 + eta1) * m0
        arrays["eta2"][i], arrays["eta1"][i], arrays["eta0"][i] = eta2, eta1, eta0

        pem_lo = max(limits.p_em_min, pt2.effective_em_lower_bound(loss, limits))
        arrays["p_em_min_eff"][i] = pem_lo
        arrays["p_b_min"][i] = battery_power(pem_lo, loss, battery)
        arrays["p_b_max"][i] = battery_power(p_em_max, loss, battery)

    stages = StageCoefficients(delta=delta, n_arrangements=n_arr, **arrays)
    lam = 0.0 if rng.random() < 0.5 else float(rng.uniform(0.0, 0.3)) * 1e-6
    return assemble(stages, m0, e0, battery, limits, lam=lam)
