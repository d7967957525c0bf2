"""Closed-loop mission execution and heuristic baselines.

The MPC law re-solves the convex program on the shrinking horizon at every
sampling instant and applies the first element of the optimal split.  The
plant advances with the full nonlinear maps (forward battery map, not the
relaxation), using the same maps as the controller unless perturbed
through the plant hooks.  Baselines: CDCS (maximum electric assist until
the battery reaches its lower SOC bound, then engine only) and pure
gas-turbine operation.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import flight_dynamics as fd
from . import powertrain as pt
from .errors import BatteryBoundsBreach, DemandExceedsCapacity, MissionInfeasible
from .ocp import STATUS_OPTIMAL, Tolerances, assemble, solve
from .scheduling import CoeffTable, FanMap, StageCoefficients, schedule

STRATEGIES = ("mpc", "cdcs", "gt_only")

# SOC excursions beyond this fraction of the band flag plant/model mismatch
SOC_BREACH_REL = 1e-6


@dataclass(frozen=True)
class PlantState:
    """Measured aircraft mass and battery SOC at sampling instant k."""

    m: float  # kg
    E: float  # J
    k: int = 0


@dataclass(frozen=True)
class StrategyConfig:
    """Which control law to run and with what knobs.

    Mission solves run tighter than the solver's 1e-8 default so the
    logged splits carry equality-recovery activity well below 1e-6
    relative; the few extra interior-point iterations are cheap.
    """

    strategy: str = "mpc"
    lam: float = 0.0               # terminal SOC weight, kg/J
    warm_start: bool = True
    keep_solutions: bool = False   # retain every OcpSolution (memory-heavy)
    dry_mass_floor: float = 34000.0  # kg, sanity floor on the plant mass
    tol: Tolerances = Tolerances(feas=1e-10, opt=1e-10)

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        if self.lam < 0.0:
            raise ValueError("lambda must be >= 0")


@dataclass
class MissionLog:
    """Closed-loop time series plus the fuel/SOC summary.

    Per-step arrays hold the state at the start of each step and the split
    applied over it; powers are per arrangement, masses whole-aircraft.
    Wall-clock solve times are kept in memory and in `timing` only; the CSV
    and summary exports are deterministic byte-for-byte across identical
    runs.
    """

    delta: float
    n_arrangements: int
    strategy: str
    t_s: np.ndarray
    p_gt_W: np.ndarray
    p_em_W: np.ndarray
    p_b_W: np.ndarray
    p_drv_W: np.ndarray
    m_kg: np.ndarray
    E_J: np.ndarray
    alpha_deg: np.ndarray
    omega_radps: np.ndarray
    status: list
    solve_time_s: np.ndarray
    final_m_kg: float
    final_E_J: float
    solutions: list | None = field(default=None, repr=False)

    @property
    def steps(self) -> int:
        return self.t_s.size

    @property
    def total_fuel_kg(self) -> float:
        return float(self.m_kg[0] - self.final_m_kg)

    @property
    def summary(self) -> dict:
        e_all = np.concatenate([self.E_J, [self.final_E_J]])
        return {
            "strategy": self.strategy,
            "steps": int(self.steps),
            "delta_s": float(self.delta),
            "n_arrangements": int(self.n_arrangements),
            "total_fuel_kg": self.total_fuel_kg,
            "final_soc_J": float(self.final_E_J),
            "min_soc_J": float(np.min(e_all)),
            "max_soc_J": float(np.max(e_all)),
            "max_abs_alpha_deg": float(np.max(np.abs(self.alpha_deg))),
        }

    @property
    def timing(self) -> dict:
        return {
            "mean_solve_s": float(np.mean(self.solve_time_s)),
            "max_solve_s": float(np.max(self.solve_time_s)),
            "total_solve_s": float(np.sum(self.solve_time_s)),
        }

    def to_csv(self, path):
        cols = ("t_s", "p_gt_W", "p_em_W", "p_b_W", "p_drv_W",
                "m_kg", "E_J", "alpha_deg", "omega_radps")
        with open(path, "w", newline="") as f:
            f.write(",".join(cols + ("status",)) + "\n")
            for i in range(self.steps):
                vals = [f"{getattr(self, c)[i]:.12g}" for c in cols]
                f.write(",".join(vals + [self.status[i]]) + "\n")

    def summary_json(self) -> str:
        return json.dumps(self.summary, sort_keys=True, indent=2) + "\n"


def plant_advance(state: PlantState, split, loss: pt.LossMapCoeffs,
                  fuel: pt.FuelMapCoeffs, battery: pt.BatteryParams,
                  delta: float, n_arrangements: int = 1) -> PlantState:
    """One forward-Euler plant step with the full nonlinear maps.

    split = (p_gt, p_em) per arrangement; mass decreases by the fuel burn
    of all n_arrangements identical engines.  Raises BatteryBoundsBreach
    when the SOC leaves its band beyond the mismatch tolerance, then clamps
    the tolerated remainder so downstream problems stay well-posed.
    """
    p_gt, p_em = split
    m_new = state.m - n_arrangements * pt.eval_fuel_rate(p_gt, fuel) * delta
    e_new = state.E - pt.battery_power(p_em, loss, battery) * delta
    tol = SOC_BREACH_REL * (battery.E_max - battery.E_min)
    if e_new < battery.E_min - tol or e_new > battery.E_max + tol:
        raise BatteryBoundsBreach(
            f"step {state.k}: SOC {e_new:.6g} J outside "
            f"[{battery.E_min:.6g}, {battery.E_max:.6g}] J")
    e_new = min(max(e_new, battery.E_min), battery.E_max)
    return PlantState(m=m_new, E=e_new, k=state.k + 1)


def mpc_step(state: PlantState, stages_tail: StageCoefficients,
             battery: pt.BatteryParams, limits: pt.PowerLimits,
             lam: float = 0.0, tol: Tolerances = Tolerances(),
             warm: dict | None = None):
    """Assemble and solve the shrinking-horizon problem; return the stage-0 split.

    Returns (p_gt, p_em, solution).  Solver failure is surfaced through
    solution.status; the mission runner halts on anything non-optimal.
    """
    prob = assemble(stages_tail, state.m, state.E, battery, limits, lam)
    sol = solve(prob, tol=tol, warm=warm)
    p_gt = float(np.clip(sol.p_gt_W[0], limits.p_gt_min, limits.p_gt_max))
    p_em = float(np.clip(sol.p_em_W[0], stages_tail.p_em_min_eff[0],
                         limits.p_em_max))
    return p_gt, p_em, sol


def cdcs_split(state: PlantState, eta_pe: fd.StageEta, loss: pt.LossMapCoeffs,
               limits: pt.PowerLimits, battery: pt.BatteryParams,
               delta: float):
    """Charge-depleting / charge-sustaining heuristic split.

    Maximum electric assist (capped by demand) until the battery reaches
    E_min; the boundary step inverts g so the SOC lands exactly on E_min
    instead of undershooting.  With negative demand both powers drop to
    their minimum feasible values and the battery is left untouched.
    """
    demand = fd.drive_power(state.m, eta_pe)
    if demand <= 0.0:
        return max(limits.p_gt_min, 0.0), 0.0
    usable = state.E - battery.E_min
    p_em = min(limits.p_em_max, demand)
    if p_em > 0.0 and usable > 0.0:
        if pt.battery_power(p_em, loss, battery) * delta > usable:
            p_em = float(np.clip(
                pt.battery_inverse(usable / delta, loss, battery), 0.0, p_em))
    else:
        p_em = 0.0
    p_gt = demand - p_em
    if p_gt > limits.p_gt_max * (1.0 + 1e-12) + 1e-9:
        raise DemandExceedsCapacity(
            f"step {state.k}: demand {demand:.6g} W needs p_gt {p_gt:.6g} W "
            f"> p_gt_max {limits.p_gt_max:.6g} W")
    p_gt = float(np.clip(p_gt, limits.p_gt_min, limits.p_gt_max))
    return p_gt, float(p_em)


def gt_only_split(state: PlantState, eta_pe: fd.StageEta,
                  limits: pt.PowerLimits):
    """Pure gas-turbine operation; motor idle."""
    demand = fd.drive_power(state.m, eta_pe)
    if demand > limits.p_gt_max * (1.0 + 1e-12) + 1e-9:
        raise DemandExceedsCapacity(
            f"step {state.k}: demand {demand:.6g} W exceeds p_gt_max "
            f"{limits.p_gt_max:.6g} W")
    return float(np.clip(demand, limits.p_gt_min, limits.p_gt_max)), 0.0


def _shift_warm(warm: dict) -> dict:
    return {k: np.asarray(v)[1:] for k, v in warm.items()}


def run_mission(plan: fd.FlightPlan, aero: fd.AeroParams,
                battery: pt.BatteryParams, limits: pt.PowerLimits,
                fan_map: FanMap, table: CoeffTable,
                m0: float, E0: float, cfg: StrategyConfig) -> MissionLog:
    """Execute the selected strategy over the full mission.

    MPC re-solves at every step (recycling the shifted previous solution as
    a warm start); heuristics apply their split rule to the measured state.
    The recovered angle of attack is logged every step for the a-posteriori
    range check.  Raises MissionInfeasible with the partial log attached
    when a solve fails; heuristic capacity errors propagate as-is.
    """
    stages = schedule(plan, m0, fan_map, table, limits, aero, battery)
    n = stages.n_stages
    if m0 <= cfg.dry_mass_floor:
        raise ValueError("initial mass at or below the dry-mass floor")

    log = {k: np.zeros(n) for k in ("t_s", "p_gt_W", "p_em_W", "p_b_W",
                                    "p_drv_W", "m_kg", "E_J", "alpha_deg",
                                    "omega_radps", "solve_time_s")}
    statuses: list[str] = []
    solutions = [] if cfg.keep_solutions else None

    state = PlantState(m=m0, E=E0, k=0)
    warm = None
    for k in range(n):
        loss = stages.loss_coeffs(k)
        fuel = stages.fuel_coeffs(k)
        eta_pe = stages.stage_eta_pe(k)
        t0 = time.perf_counter()
        if cfg.strategy == "mpc":
            p_gt, p_em, sol = mpc_step(state, stages.tail(k), battery, limits,
                                       lam=cfg.lam, tol=cfg.tol, warm=warm)
            status = sol.status
            if solutions is not None:
                solutions.append(sol)
            if sol.status != STATUS_OPTIMAL:
                partial = _package_log(log, statuses, solutions, stages, cfg,
                                       state, upto=k)
                raise MissionInfeasible(
                    f"solver returned {sol.status} at step {k}: {sol.message}",
                    log=partial)
            warm = _shift_warm(sol.warm_data) if cfg.warm_start and k < n - 1 else None
        elif cfg.strategy == "cdcs":
            p_gt, p_em = cdcs_split(state, eta_pe, loss, limits, battery,
                                    stages.delta)
            status = "heuristic"
        else:
            p_gt, p_em = gt_only_split(state, eta_pe, limits)
            status = "heuristic"
        dt = time.perf_counter() - t0

        log["t_s"][k] = k * stages.delta
        log["p_gt_W"][k] = p_gt
        log["p_em_W"][k] = p_em
        log["p_b_W"][k] = pt.battery_power(p_em, loss, battery)
        log["p_drv_W"][k] = fd.drive_power(state.m, eta_pe)
        log["m_kg"][k] = state.m
        log["E_J"][k] = state.E
        log["alpha_deg"][k] = fd.recover_alpha(k, state.m, plan, aero).alpha_deg
        log["omega_radps"][k] = stages.omega[k]
        log["solve_time_s"][k] = dt
        statuses.append(status)

        state = plant_advance(state, (p_gt, p_em), loss, fuel, battery,
                              stages.delta, n_arrangements=stages.n_arrangements)
        if state.m <= cfg.dry_mass_floor:
            raise ValueError(f"plant mass fell to the dry-mass floor at step {k}")

    return _package_log(log, statuses, solutions, stages, cfg, state, upto=n)


def _package_log(log, statuses, solutions, stages, cfg, final_state,
                 upto: int) -> MissionLog:
    sl = slice(0, upto)
    return MissionLog(
        delta=stages.delta,
        n_arrangements=stages.n_arrangements,
        strategy=cfg.strategy,
        t_s=log["t_s"][sl].copy(),
        p_gt_W=log["p_gt_W"][sl].copy(),
        p_em_W=log["p_em_W"][sl].copy(),
        p_b_W=log["p_b_W"][sl].copy(),
        p_drv_W=log["p_drv_W"][sl].copy(),
        m_kg=log["m_kg"][sl].copy(),
        E_J=log["E_J"][sl].copy(),
        alpha_deg=log["alpha_deg"][sl].copy(),
        omega_radps=log["omega_radps"][sl].copy(),
        status=list(statuses[:upto]),
        solve_time_s=log["solve_time_s"][sl].copy(),
        final_m_kg=final_state.m,
        final_E_J=final_state.E,
        solutions=solutions,
    )


def calibrate_fuel_scale(plan: fd.FlightPlan, aero: fd.AeroParams,
                         battery: pt.BatteryParams, limits: pt.PowerLimits,
                         fan_map: FanMap, table: CoeffTable,
                         m0: float, E0: float, target_frac: float,
                         lam: float = 0.0, rel_tol: float = 1e-3,
                         max_iter: int = 60) -> float:
    """Multiplier on beta1 so the optimal mission mass change hits target_frac.

    Bisection on the k = 0 open-loop optimum, which coincides with the
    nominal closed loop (exact model, convex problem).  The predicted mass
    change is monotone increasing in the scale, so the bracket [1, hi]
    expands until it contains the target and then halves.
    """
    if not 0.0 < target_frac < 0.5:
        raise ValueError("target mass-change fraction must be in (0, 0.5)")

    def frac(scale):
        stages = schedule(plan, m0, fan_map, table.scaled(beta1_scale=scale),
                          limits, aero, battery)
        sol = solve(assemble(stages, m0, E0, battery, limits, lam))
        if sol.status != STATUS_OPTIMAL:
            raise MissionInfeasible(
                f"fuel-scale calibration solve failed at scale {scale:.4g}")
        return (m0 - sol.m_kg[-1]) / m0

    lo, hi = 1.0, 2.0
    f_lo = frac(lo)
    if f_lo >= target_frac:
        raise ValueError("baseline fuel map already exceeds the target mass change")
    while frac(hi) < target_frac:
        hi *= 2.0
        if hi > 64.0:
            raise ValueError("fuel-scale search bracket exploded")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if frac(mid) < target_frac:
            lo = mid
        else:
            hi = mid
        if (hi - lo) / hi < rel_tol:
            break
    return 0.5 * (lo + hi)
