"""Problem data for the convex power-split program and its scaled form.

Decision variables per stage i: gas turbine power P_gt,i, battery power
P_b,i, the motor-shaft epigraph variable s_i <= g_i^-1(P_b,i), and the
next-step states m_{i+1}, E_{i+1}.  Constraints:

    P_gt,i + s_i        >= eta2,i m_i^2 + eta1,i m_i + eta0,i      (drive)
    m_{i+1}             <= m_i - n f_i(P_gt,i) delta               (mass)
    h_i(s_i)            <= P_b,i - (R/U^2) P_b,i^2                 (epigraph)
    E_{i+1}              = E_i - P_b,i delta                       (SOC)
    box bounds on P_gt, P_b, E.

The epigraph row is the s <= g_i^-1(P_b) relaxation multiplied through by
kappa2: a single convex quadratic valid for kappa2 >= 0, so the solver
never branches on the inverse's closed form.  The drive and mass rows are
the relaxed-to-inequality dynamics; minimising m_0 - m_N (- lambda E_N)
recovers them with equality at any optimum not pinned at a power bound.

Scaling: masses are divided by m0, powers by p_gt_max, energies by E_max,
keeping all problem data within a few orders of unity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import powertrain as pt
from ..errors import DimensionMismatch, InconsistentBounds
from ..scheduling import StageCoefficients

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_MAX_ITERATIONS = "max_iterations"

# variable columns within a stage block
PG, PB, SS, MM, EE = 0, 1, 2, 3, 4
NV = 5
# inequality rows within a stage
C1, C3, C2, GL, GU, BL, BU, EL, EU = range(9)
NI = 9

ROW_NAMES = {
    C1: "drive power", C3: "mass dynamics", C2: "battery epigraph",
    GL: "p_gt lower bound", GU: "p_gt upper bound",
    BL: "p_b lower bound", BU: "p_b upper bound",
    EL: "SOC lower bound", EU: "SOC upper bound",
}


@dataclass(frozen=True)
class Tolerances:
    """Relative feasibility / duality-gap tolerances on the scaled data."""

    feas: float = 1e-8
    opt: float = 1e-8


@dataclass(frozen=True)
class ScaledData:
    """Pre-scaled per-stage coefficient arrays consumed by the solver."""

    N: int
    M_s: float  # kg
    P_s: float  # W
    E_s: float  # J
    A2: np.ndarray
    A1: np.ndarray
    A0: np.ndarray
    K2: np.ndarray
    K1: np.ndarray
    K0: np.ndarray
    Rh: float
    B2: np.ndarray
    B1: np.ndarray
    B0: np.ndarray
    Dh: float
    pgl: float
    pgu: float
    pbl: np.ndarray
    pbu: np.ndarray
    el: float
    eu: float
    m0s: float
    e0s: float
    lam_s: float  # objective weight on scaled E_N


@dataclass(frozen=True)
class OcpProblem:
    """Validated shrinking-horizon problem instance (immutable).

    Objective: m0 - m_N - lam * (n_arrangements * E_N), i.e. whole-aircraft
    fuel burned minus the terminal-SOC reward over all batteries; per
    arrangement the identical units make the problem symmetric.
    """

    N: int
    delta: float
    stages: StageCoefficients
    m0: float
    E0: float
    battery: pt.BatteryParams
    limits: pt.PowerLimits
    lam: float  # terminal SOC weight, kg/J
    n_arrangements: int
    sd: ScaledData = field(repr=False)

    def terminal_objective(self, m_N: float, E_N: float) -> float:
        """Objective value (kg) for terminal mass m_N and per-battery SOC E_N."""
        return self.m0 - m_N - self.lam * self.n_arrangements * E_N


def assemble(stages: StageCoefficients, m0: float, E0: float,
             battery: pt.BatteryParams, limits: pt.PowerLimits,
             lam: float = 0.0) -> OcpProblem:
    """Validate inputs and build the scaled problem data.

    Raises DimensionMismatch for inconsistent stage arrays and
    InconsistentBounds for data violating its own box constraints.
    """
    n = stages.n_stages
    if n < 1:
        raise DimensionMismatch("horizon must contain at least one stage")
    for f in ("eta2", "eta1", "eta0", "kappa2", "kappa1", "kappa0",
              "beta2", "beta1", "beta0", "omega",
              "p_em_min_eff", "p_b_min", "p_b_max"):
        if getattr(stages, f).shape != (n,):
            raise DimensionMismatch(f"stage array {f} has wrong length")
    if m0 <= 0.0:
        raise InconsistentBounds(f"m0 must be > 0, got {m0}")
    if not battery.E_min <= E0 <= battery.E_max:
        raise InconsistentBounds(
            f"E0 = {E0:.6g} J outside SOC band [{battery.E_min:.6g}, {battery.E_max:.6g}]")
    if limits.p_gt_max <= 0.0:
        raise InconsistentBounds("p_gt_max must be > 0")
    if np.any(stages.p_b_min > stages.p_b_max):
        raise InconsistentBounds("stage battery power bounds are crossed")
    if lam < 0.0:
        raise InconsistentBounds(f"lambda must be >= 0, got {lam}")

    ms, ps, es = m0, limits.p_gt_max, battery.E_max
    delta = stages.delta
    n_arr = stages.n_arrangements
    sd = ScaledData(
        N=n, M_s=ms, P_s=ps, E_s=es,
        A2=stages.eta2 * ms * ms / ps,
        A1=stages.eta1 * ms / ps,
        A0=stages.eta0 / ps,
        K2=stages.kappa2 * ps,
        K1=stages.kappa1.copy(),
        K0=stages.kappa0 / ps,
        Rh=battery.R * ps / (battery.U * battery.U),
        B2=n_arr * delta * stages.beta2 * ps * ps / ms,
        B1=n_arr * delta * stages.beta1 * ps / ms,
        B0=n_arr * delta * stages.beta0 / ms,
        Dh=delta * ps / es,
        pgl=limits.p_gt_min / ps,
        pgu=limits.p_gt_max / ps,
        pbl=stages.p_b_min / ps,
        pbu=stages.p_b_max / ps,
        el=battery.E_min / es,
        eu=battery.E_max / es,
        m0s=m0 / ms,
        e0s=E0 / es,
        # objective counts whole-aircraft fuel, so the terminal-SOC reward
        # counts all n_arrangements batteries as well
        lam_s=lam * n_arr * es / ms,
    )
    return OcpProblem(N=n, delta=delta, stages=stages, m0=m0, E0=E0,
                      battery=battery, limits=limits, lam=lam,
                      n_arrangements=n_arr, sd=sd)


@dataclass
class OcpSolution:
    """Solution of one shrinking-horizon solve, unscaled to SI."""

    p_gt_W: np.ndarray   # (N,)
    p_b_W: np.ndarray    # (N,)
    p_em_W: np.ndarray   # (N,), recovered as g_i^-1(P_b,i)
    m_kg: np.ndarray     # (N+1,)
    E_J: np.ndarray      # (N+1,)
    objective_kg: float  # m0 - m_N - lambda E_N
    status: str
    iterations: int
    kkt_residuals: dict
    message: str = ""
    warm_data: dict | None = field(default=None, repr=False)

    @property
    def fuel_kg(self) -> float:
        return float(self.m_kg[0] - self.m_kg[-1])

    def to_json_dict(self) -> dict:
        return {
            "p_gt_W": [float(v) for v in self.p_gt_W],
            "p_b_W": [float(v) for v in self.p_b_W],
            "p_em_W": [float(v) for v in self.p_em_W],
            "m_kg": [float(v) for v in self.m_kg],
            "E_J": [float(v) for v in self.E_J],
            "objective_kg": float(self.objective_kg),
            "status": self.status,
            "iterations": int(self.iterations),
            "max_kkt_residual": float(max(self.kkt_residuals.values()))
            if self.kkt_residuals else float("nan"),
            "kkt_residuals": {k: float(v) for k, v in self.kkt_residuals.items()},
            "message": self.message,
        }


def recovery_report(p: OcpProblem, sol: "OcpSolution") -> dict:
    """Worst relative slacks of the relaxed rows at a solution.

    The relaxation is lossless only if the mass rows hold with equality and
    the drive rows hold with equality wherever the turbine is strictly
    inside its power bounds; callers inspect this instead of trusting the
    relaxation silently.
    """
    st = p.stages
    fuel = p.n_arrangements * ((st.beta2 * sol.p_gt_W + st.beta1) * sol.p_gt_W
                               + st.beta0) * p.delta
    mass_rel = np.max(np.abs(sol.m_kg[1:] - (sol.m_kg[:-1] - fuel))
                      / sol.m_kg[:-1])
    demand = (st.eta2 * sol.m_kg[:-1] + st.eta1) * sol.m_kg[:-1] + st.eta0
    margin = 1e-5 * (p.limits.p_gt_max - p.limits.p_gt_min)
    interior = ((sol.p_gt_W > p.limits.p_gt_min + margin)
                & (sol.p_gt_W < p.limits.p_gt_max - margin))
    power_rel = 0.0
    if np.any(interior):
        power_rel = float(np.max(
            np.abs((sol.p_gt_W + sol.p_em_W - demand)[interior]))
            / p.limits.p_gt_max)
    return {"mass_rel": float(mass_rel), "power_rel": power_rel,
            "interior_stages": int(np.sum(interior))}


def capacity_certificate(p: OcpProblem) -> str | None:
    """Cheap static infeasibility certificates, or None.

    Checks (a) per-stage drive demand that exceeds the combined shaft power
    capacity for every reachable mass, and (b) forced battery drain that
    must exhaust the SOC band.  Sound but deliberately incomplete; the
    interior-point loop reports anything subtler.
    """
    st = p.stages
    lim = p.limits
    # slowest possible mass decrease: mass row forces at least f(p_gt_min)
    f_lo = (st.beta2 * lim.p_gt_min + st.beta1) * lim.p_gt_min + st.beta0
    burn_hi = np.concatenate([[0.0], np.cumsum(f_lo)]) * p.delta * p.n_arrangements
    m_hi = p.m0 - burn_hi[:-1]  # largest reachable m_i, stage i
    cap = lim.p_gt_max + lim.p_em_max
    for i in range(p.N):
        vertex = -st.eta1[i] / (2.0 * st.eta2[i])
        m_at = min(m_hi[i], vertex) if vertex < m_hi[i] else m_hi[i]
        # relaxed mass row lets m_i fall freely, so the minimum demand over
        # reachable masses sits at the vertex or at the upper end
        d_min = (st.eta2[i] * m_at + st.eta1[i]) * m_at + st.eta0[i]
        d_min = min(d_min, (st.eta2[i] * m_hi[i] + st.eta1[i]) * m_hi[i] + st.eta0[i])
        if d_min > cap * (1.0 + 1e-12) + 1e-9:
            return (f"stage {i}: drive demand >= {d_min:.6g} W exceeds per-arrangement "
                    f"capacity p_gt_max + p_em_max = {cap:.6g} W")
    drain = np.cumsum(np.maximum(st.p_b_min, 0.0)) * p.delta
    if np.any(p.E0 - drain < p.battery.E_min - 1e-9):
        i = int(np.argmax(p.E0 - drain < p.battery.E_min - 1e-9))
        return (f"stage {i}: forced battery drain exhausts the SOC band "
                f"(E0 - cumulative minimum drain < E_min)")
    return None
