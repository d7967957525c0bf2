"""Per-stage coefficient scheduling from the planned flight path.

The convex problem needs the loss/fuel map coefficients fixed per stage.
Gas turbine and electric motor share the fan shaft, so a single speed per
stage is interpolated from a fan map (drive power x altitude -> Omega) and
the coefficients are then interpolated at that speed from a pre-fit table.
The drive power entering the lookup is a prior estimate computed with the
constant-mass assumption m_i = m0; closed-loop mass deviations move the
scheduled coefficients only marginally (asserted in tests).

Power conventions: eta coefficients from flight_dynamics describe the whole
aircraft; everything stored in StageCoefficients is per arrangement
(divided by n_arrangements), so the per-engine Table-style power bounds
apply directly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import flight_dynamics as fd
from . import powertrain as pt
from .errors import CoeffOutOfTable, GridOutOfRange

# omega = (156.7/100) * (pi/30) * Omega * sqrt(T_in)
SPEED_SCALE = (156.7 / 100.0) * (np.pi / 30.0)


def isa_temperature(h) -> float:
    """ISA troposphere temperature at altitude h (m), K."""
    return 288.15 - 0.0065 * np.asarray(h, dtype=float)


@dataclass(frozen=True)
class FanMap:
    """Non-dimensional fan speed Omega gridded over altitude and drive power."""

    h_grid: np.ndarray      # (H,), m, strictly increasing
    p_grid: np.ndarray      # (P,), W, strictly increasing
    omega_nd: np.ndarray    # (H, P), non-dimensional speed
    mach: float = 0.55
    c_p: float = 1000.0     # J/(K kg)

    def __post_init__(self):
        if np.any(np.diff(self.h_grid) <= 0) or np.any(np.diff(self.p_grid) <= 0):
            raise ValueError("fan map grid axes must be strictly increasing")
        if self.omega_nd.shape != (self.h_grid.size, self.p_grid.size):
            raise ValueError("omega_nd shape mismatch with grid axes")
        if np.any(np.diff(self.omega_nd, axis=1) < 0):
            raise ValueError("Omega must be non-decreasing in drive power at fixed altitude")

    @classmethod
    def from_csv(cls, path, mach: float = 0.55, c_p: float = 1000.0) -> "FanMap":
        """Load `h_m,p_drv_MW,Omega` rows forming a full rectangular grid."""
        rows = []
        with open(path, newline="") as f:
            reader = csv.DictReader(f)
            for req in ("h_m", "p_drv_MW", "Omega"):
                if req not in (reader.fieldnames or []):
                    raise ValueError(f"fan map {path} missing column {req}")
            for row in reader:
                rows.append((float(row["h_m"]), float(row["p_drv_MW"]) * 1e6,
                             float(row["Omega"])))
        hs = np.unique([r[0] for r in rows])
        ps = np.unique([r[1] for r in rows])
        grid = np.full((hs.size, ps.size), np.nan)
        for h, p, om in rows:
            grid[np.searchsorted(hs, h), np.searchsorted(ps, p)] = om
        if np.any(np.isnan(grid)):
            raise ValueError(f"fan map {path} is not a full rectangular grid")
        return cls(h_grid=hs, p_grid=ps, omega_nd=grid, mach=mach, c_p=c_p)

    @classmethod
    def synthetic(cls, h_max: float = 12000.0, p_min: float = -3e6,
                  p_max: float = 7e6, n_h: int = 7, n_p: int = 21) -> "FanMap":
        """Synthetic stand-in for proprietary fan data.

        Monotone non-decreasing in drive power and mildly increasing with
        altitude; shaped to give shaft speeds in the low hundreds of rad/s
        for megawatt-class drive powers.  Not measured data.
        """
        hs = np.linspace(0.0, h_max, n_h)
        ps = np.linspace(p_min, p_max, n_p)
        u = (ps - p_min) / (p_max - p_min)
        grid = 48.0 + 70.0 * u[None, :] ** 0.8 + 5.0 * (hs[:, None] / h_max)
        return cls(h_grid=hs, p_grid=ps, omega_nd=grid)

    def to_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["h_m", "p_drv_MW", "Omega"])
            for i, h in enumerate(self.h_grid):
                for j, p in enumerate(self.p_grid):
                    w.writerow([f"{h:.10g}", f"{p / 1e6:.10g}",
                                f"{self.omega_nd[i, j]:.10g}"])


def _bilinear(x, xs, y, ys, grid):
    ix = np.searchsorted(xs, x) - 1
    ix = min(max(ix, 0), xs.size - 2)
    iy = np.searchsorted(ys, y) - 1
    iy = min(max(iy, 0), ys.size - 2)
    tx = (x - xs[ix]) / (xs[ix + 1] - xs[ix])
    ty = (y - ys[iy]) / (ys[iy + 1] - ys[iy])
    return ((1 - tx) * (1 - ty) * grid[ix, iy]
            + tx * (1 - ty) * grid[ix + 1, iy]
            + (1 - tx) * ty * grid[ix, iy + 1]
            + tx * ty * grid[ix + 1, iy + 1])


def shaft_speed(h: float, p_drv: float, v: float, fan_map: FanMap) -> float:
    """Shaft speed (rad/s) at altitude h, per-engine drive power p_drv, TAS v.

    Bilinear interpolation of the non-dimensional speed, then scaling by the
    square root of the fan inlet temperature T_in = T0(h) + v^2/(2 c_p).
    No extrapolation: coordinates outside the grid hull raise GridOutOfRange.
    """
    if not fan_map.h_grid[0] <= h <= fan_map.h_grid[-1]:
        raise GridOutOfRange(f"altitude {h} m outside fan map "
                             f"[{fan_map.h_grid[0]}, {fan_map.h_grid[-1]}]")
    if not fan_map.p_grid[0] <= p_drv <= fan_map.p_grid[-1]:
        raise GridOutOfRange(f"drive power {p_drv} W outside fan map "
                             f"[{fan_map.p_grid[0]}, {fan_map.p_grid[-1]}]")
    omega_nd = _bilinear(h, fan_map.h_grid, p_drv, fan_map.p_grid, fan_map.omega_nd)
    t_in = isa_temperature(h) + v * v / (2.0 * fan_map.c_p)
    return float(SPEED_SCALE * omega_nd * np.sqrt(t_in))


@dataclass(frozen=True)
class CoeffTable:
    """Loss/fuel map coefficients at a pre-determined set of shaft speeds."""

    omega: np.ndarray   # (M,), rad/s, strictly increasing
    kappa2: np.ndarray  # 1/W
    kappa1: np.ndarray
    kappa0: np.ndarray  # W
    beta2: np.ndarray   # kg/s/W^2
    beta1: np.ndarray   # kg/s/W
    beta0: np.ndarray   # kg/s

    def __post_init__(self):
        if self.omega.size > 1 and np.any(np.diff(self.omega) <= 0):
            raise ValueError("coefficient table breakpoints must be strictly increasing")
        for arr in (self.kappa2, self.kappa1, self.kappa0,
                    self.beta2, self.beta1, self.beta0):
            if arr.shape != self.omega.shape:
                raise ValueError("coefficient columns must match breakpoint count")
        if np.any(self.kappa2 < 0) or np.any(self.kappa1 <= 0):
            raise ValueError("rows must satisfy kappa2 >= 0, kappa1 > 0")
        if np.any(self.beta2 < 0) or np.any(self.beta1 <= 0):
            raise ValueError("rows must satisfy beta2 >= 0, beta1 > 0")

    @classmethod
    def from_csv(cls, path) -> "CoeffTable":
        """Load `omega_radps,kappa2,kappa1,kappa0,beta2,beta1,beta0` (SI)."""
        cols = {k: [] for k in ("omega_radps", "kappa2", "kappa1", "kappa0",
                                "beta2", "beta1", "beta0")}
        with open(path, newline="") as f:
            reader = csv.DictReader(f)
            for req in cols:
                if req not in (reader.fieldnames or []):
                    raise ValueError(f"coefficient table {path} missing column {req}")
            for row in reader:
                for k in cols:
                    cols[k].append(float(row[k]))
        return cls(omega=np.asarray(cols["omega_radps"]),
                   kappa2=np.asarray(cols["kappa2"]),
                   kappa1=np.asarray(cols["kappa1"]),
                   kappa0=np.asarray(cols["kappa0"]),
                   beta2=np.asarray(cols["beta2"]),
                   beta1=np.asarray(cols["beta1"]),
                   beta0=np.asarray(cols["beta0"]))

    def to_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["omega_radps", "kappa2", "kappa1", "kappa0",
                        "beta2", "beta1", "beta0"])
            for i in range(self.omega.size):
                w.writerow([f"{self.omega[i]:.10g}", f"{self.kappa2[i]:.10g}",
                            f"{self.kappa1[i]:.10g}", f"{self.kappa0[i]:.10g}",
                            f"{self.beta2[i]:.10g}", f"{self.beta1[i]:.10g}",
                            f"{self.beta0[i]:.10g}"])

    def interpolate(self, omega: float):
        """Piecewise-linear coefficients at shaft speed omega; no extrapolation.

        A single-row table is degenerate: its coefficients apply at any speed.
        """
        om = self.omega
        if om.size > 1 and not om[0] <= omega <= om[-1]:
            raise CoeffOutOfTable(
                f"shaft speed {omega:.6g} rad/s outside table [{om[0]}, {om[-1]}]")

        def lin(col):
            return float(np.interp(omega, om, col))

        loss = pt.LossMapCoeffs(kappa2=lin(self.kappa2), kappa1=lin(self.kappa1),
                                kappa0=lin(self.kappa0))
        fuel = pt.FuelMapCoeffs(beta2=lin(self.beta2), beta1=lin(self.beta1),
                                beta0=lin(self.beta0))
        return loss, fuel

    def scaled(self, beta1_scale: float = 1.0) -> "CoeffTable":
        """Copy with the marginal fuel coefficient scaled (heavy-fuel studies)."""
        if beta1_scale <= 0.0:
            raise ValueError("beta1_scale must be > 0")
        return CoeffTable(omega=self.omega, kappa2=self.kappa2,
                          kappa1=self.kappa1, kappa0=self.kappa0,
                          beta2=self.beta2, beta1=self.beta1 * beta1_scale,
                          beta0=self.beta0)

    @classmethod
    def single_row(cls, loss: pt.LossMapCoeffs, fuel: pt.FuelMapCoeffs,
                   omega: float = 0.0) -> "CoeffTable":
        """Degenerate one-row table: constant coefficients at any speed."""
        one = np.asarray([1.0])
        return cls(omega=np.asarray([omega]),
                   kappa2=one * loss.kappa2, kappa1=one * loss.kappa1,
                   kappa0=one * loss.kappa0,
                   beta2=one * fuel.beta2, beta1=one * fuel.beta1,
                   beta0=one * fuel.beta0)


@dataclass(frozen=True)
class StageCoefficients:
    """Per-stage scheduled data, per arrangement, for the convex problem.

    Arrays all have length N (stage count).  Battery power bounds satisfy
    p_b_min = g_i(p_em_min_eff) <= p_b_max = g_i(p_em_max) by construction.
    """

    delta: float
    n_arrangements: int
    eta2: np.ndarray
    eta1: np.ndarray
    eta0: np.ndarray
    kappa2: np.ndarray
    kappa1: np.ndarray
    kappa0: np.ndarray
    beta2: np.ndarray
    beta1: np.ndarray
    beta0: np.ndarray
    omega: np.ndarray
    p_em_min_eff: np.ndarray
    p_b_min: np.ndarray
    p_b_max: np.ndarray

    @property
    def n_stages(self) -> int:
        return self.eta2.size

    def tail(self, k: int) -> "StageCoefficients":
        """Stages k..N-1, the shrinking-horizon view at step k."""
        if not 0 <= k < self.n_stages:
            raise IndexError(f"step {k} outside [0, {self.n_stages - 1}]")
        kw = {f: getattr(self, f)[k:] for f in
              ("eta2", "eta1", "eta0", "kappa2", "kappa1", "kappa0",
               "beta2", "beta1", "beta0", "omega",
               "p_em_min_eff", "p_b_min", "p_b_max")}
        return StageCoefficients(delta=self.delta,
                                 n_arrangements=self.n_arrangements, **kw)

    def loss_coeffs(self, i: int) -> pt.LossMapCoeffs:
        return pt.LossMapCoeffs(kappa2=float(self.kappa2[i]),
                                kappa1=float(self.kappa1[i]),
                                kappa0=float(self.kappa0[i]))

    def fuel_coeffs(self, i: int) -> pt.FuelMapCoeffs:
        return pt.FuelMapCoeffs(beta2=float(self.beta2[i]),
                                beta1=float(self.beta1[i]),
                                beta0=float(self.beta0[i]))

    def stage_eta_pe(self, i: int) -> fd.StageEta:
        """Per-arrangement drive power coefficients of stage i."""
        return fd.StageEta(eta2=float(self.eta2[i]), eta1=float(self.eta1[i]),
                           eta0=float(self.eta0[i]))


def estimate_drive_profile(plan: fd.FlightPlan, m0: float, aero: fd.AeroParams):
    """Whole-aircraft drive power per stage under the constant-mass prior m0."""
    if m0 <= 0.0:
        raise ValueError("m0 must be > 0")
    out = np.empty(plan.n_stages)
    for i in range(plan.n_stages):
        out[i] = fd.drive_power(m0, fd.stage_eta(i, plan, aero))
    return out


def schedule(plan: fd.FlightPlan, m0: float, fan_map: FanMap, table: CoeffTable,
             limits: pt.PowerLimits, aero: fd.AeroParams,
             battery: pt.BatteryParams) -> StageCoefficients:
    """Schedule all per-stage problem data for the given plan.

    For every stage: eta from the angle-of-attack elimination (divided by
    n_arrangements), shaft speed from the fan map at the estimated
    per-engine drive power, loss/fuel coefficients interpolated at that
    speed, the one-to-one lower motor bound applied, and the battery power
    box computed through the forward map g.
    """
    n = plan.n_stages
    if n < 1:
        raise ValueError("plan has no stages")
    n_arr = aero.n_arrangements
    drive_est = estimate_drive_profile(plan, m0, aero) / n_arr

    out = {k: np.empty(n) for k in
           ("eta2", "eta1", "eta0", "kappa2", "kappa1", "kappa0",
            "beta2", "beta1", "beta0", "omega",
            "p_em_min_eff", "p_b_min", "p_b_max")}
    for i in range(n):
        eta = fd.stage_eta(i, plan, aero)
        out["eta2"][i] = eta.eta2 / n_arr
        out["eta1"][i] = eta.eta1 / n_arr
        out["eta0"][i] = eta.eta0 / n_arr
        om = shaft_speed(plan.h[i], drive_est[i], plan.v[i], fan_map)
        loss, fuel = table.interpolate(om)
        out["omega"][i] = om
        out["kappa2"][i], out["kappa1"][i], out["kappa0"][i] = \
            loss.kappa2, loss.kappa1, loss.kappa0
        out["beta2"][i], out["beta1"][i], out["beta0"][i] = \
            fuel.beta2, fuel.beta1, fuel.beta0
        pem_lo = max(limits.p_em_min, pt.effective_em_lower_bound(loss, limits))
        out["p_em_min_eff"][i] = pem_lo
        out["p_b_min"][i] = pt.battery_power(pem_lo, loss, battery)
        out["p_b_max"][i] = pt.battery_power(limits.p_em_max, loss, battery)

    sc = StageCoefficients(delta=plan.delta, n_arrangements=n_arr,
                           **{k: v for k, v in out.items()})
    # standing sign assumptions of the convex formulation
    assert np.all(sc.eta2 > 0)
    assert np.all(sc.kappa2 >= 0) and np.all(sc.kappa1 > 0)
    assert np.all(sc.beta2 >= 0) and np.all(sc.beta1 > 0)
    assert np.all(sc.p_b_min <= sc.p_b_max)
    return sc
