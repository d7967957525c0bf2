"""Point-mass aircraft model and the drive-power convexification.

The lift equation is solved for the angle of attack and substituted into
the drag/thrust power balance, so the drive power at stage i becomes a
convex quadratic in the aircraft mass,

    P_drv,i = eta2_i * m^2 + eta1_i * m + eta0_i,

with stage coefficients depending only on the (externally fixed) speed and
flight-path-angle profile.  The eliminated angle of attack is recovered a
posteriori and checked against the fitted coefficient domain.

Aerodynamic fits are quoted per degree in the usual tables; this module
converts them to per-radian at ingestion so every formula below uses
radians consistently with the trigonometric terms.  The eta coefficient
ratios (a2/b1^2, a1/b1, ...) are invariant under that conversion.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import AlphaOutOfRange

DEG = np.pi / 180.0


@dataclass(frozen=True)
class AeroParams:
    """Aerodynamic fits (per radian), geometry and atmosphere constants."""

    a0: float     # drag polynomial constant
    a1: float     # drag polynomial, 1/rad
    a2: float     # drag polynomial, 1/rad^2
    b0: float     # lift constant
    b1: float     # lift slope, 1/rad
    S: float      # wing area, m^2
    rho: float    # air density, kg/m^3
    grav: float   # gravitational acceleration, m/s^2
    alpha_min_deg: float
    alpha_max_deg: float
    n_arrangements: int = 1

    def __post_init__(self):
        if self.a2 <= 0.0:
            raise ValueError("a2 must be > 0")
        if self.b1 <= 0.0:
            raise ValueError("b1 must be > 0")
        if self.S <= 0.0 or self.rho <= 0.0:
            raise ValueError("S and rho must be > 0")
        if not self.alpha_min_deg < self.alpha_max_deg:
            raise ValueError("alpha_min_deg must be < alpha_max_deg")
        if self.n_arrangements < 1:
            raise ValueError("n_arrangements must be >= 1")

    @classmethod
    def from_degree_fits(cls, a0, a1_per_deg, a2_per_deg2, b0, b1_per_deg,
                         S, rho, grav, alpha_min_deg, alpha_max_deg,
                         n_arrangements=1) -> "AeroParams":
        """Build from table values quoted per degree."""
        return cls(
            a0=a0,
            a1=a1_per_deg / DEG,
            a2=a2_per_deg2 / DEG / DEG,
            b0=b0,
            b1=b1_per_deg / DEG,
            S=S,
            rho=rho,
            grav=grav,
            alpha_min_deg=alpha_min_deg,
            alpha_max_deg=alpha_max_deg,
            n_arrangements=n_arrangements,
        )


@dataclass(frozen=True)
class StageEta:
    """Quadratic-in-mass drive power coefficients for one stage."""

    eta2: float  # W/kg^2
    eta1: float  # W/kg
    eta0: float  # W

    def __post_init__(self):
        if self.eta2 <= 0.0:
            raise ValueError("eta2 must be > 0")


class AlphaRecovery(NamedTuple):
    alpha_deg: float
    in_range: bool


class FlightPlan:
    """Sampled flight path: true airspeed, flight-path angle and altitude.

    Holds N+1 samples at uniform spacing `delta`; stage i uses samples i and
    i+1 for the forward differences.  The flight-path angle may be supplied
    or derived kinematically from the altitude profile,
    gamma_i = arcsin(clamp((h_{i+1} - h_i) / (v_i * delta), -1, 1)).
    """

    def __init__(self, delta: float, h, v, gamma=None, t=None):
        self.delta = float(delta)
        self.h = np.asarray(h, dtype=float)
        self.v = np.asarray(v, dtype=float)
        n = self.h.size
        if self.v.size != n:
            raise ValueError("h and v must have equal length")
        if n < 2:
            raise ValueError("plan needs at least 2 samples (1 stage)")
        if self.delta <= 0.0:
            raise ValueError("delta must be > 0")
        if np.any(self.v <= 0.0):
            raise ValueError("true airspeed must be > 0 at every sample")
        self.t = (np.arange(n) * self.delta) if t is None else np.asarray(t, dtype=float)
        if gamma is None:
            gamma = self._derive_gamma()
        self.gamma = np.asarray(gamma, dtype=float)
        if self.gamma.size != n:
            raise ValueError("gamma must match h/v length")
        if np.any(np.abs(self.gamma) >= np.pi / 2):
            raise ValueError("flight path angle must satisfy |gamma| < pi/2")

    def _derive_gamma(self):
        dh = np.diff(self.h)
        sin_g = np.clip(dh / (self.v[:-1] * self.delta), -1.0, 1.0)
        g = np.arcsin(sin_g)
        # last sample has no forward difference; repeat the final stage value
        return np.concatenate([g, g[-1:]])

    @property
    def n_stages(self) -> int:
        return self.h.size - 1

    @classmethod
    def from_csv(cls, path, delta: float | None = None) -> "FlightPlan":
        """Load `t_s,h_m,v_mps[,gamma_rad]` rows; gamma derived if absent.

        When `delta` differs from the file spacing the profile is linearly
        resampled onto the requested grid over the same total time.
        """
        t, h, v, gam = [], [], [], []
        with open(path, newline="") as f:
            reader = csv.DictReader(f)
            names = reader.fieldnames or []
            for req in ("t_s", "h_m", "v_mps"):
                if req not in names:
                    raise ValueError(f"flight plan {path} missing column {req}")
            has_gamma = "gamma_rad" in names
            for row in reader:
                t.append(float(row["t_s"]))
                h.append(float(row["h_m"]))
                v.append(float(row["v_mps"]))
                if has_gamma:
                    gam.append(float(row["gamma_rad"]))
        t = np.asarray(t)
        file_delta = float(t[1] - t[0])
        if not np.allclose(np.diff(t), file_delta, rtol=0, atol=1e-9 * file_delta):
            raise ValueError(f"flight plan {path} is not uniformly sampled")
        if delta is None or np.isclose(delta, file_delta):
            return cls(file_delta, h, v, gamma=gam if has_gamma else None)
        n_new = int(round(t[-1] / delta))
        t_new = np.arange(n_new + 1) * delta
        if t_new[-1] > t[-1] + 1e-9:
            raise ValueError("requested delta does not divide the plan duration")
        h_new = np.interp(t_new, t, h)
        v_new = np.interp(t_new, t, v)
        g_new = np.interp(t_new, t, gam) if has_gamma else None
        return cls(float(delta), h_new, v_new, gamma=g_new)

    def to_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["t_s", "h_m", "v_mps", "gamma_rad"])
            for i in range(self.h.size):
                w.writerow([f"{self.t[i]:.10g}", f"{self.h[i]:.10g}",
                            f"{self.v[i]:.10g}", f"{self.gamma[i]:.12g}"])


def isa_density(h) -> float:
    """ISA troposphere air density at altitude h (m), kg/m^3.

    Optional hook for altitude-varying density studies; the bundled
    scenarios keep rho fixed at 1.225 kg/m^3, matching the fixed-density
    simplification baked into their parameter sets.  Valid below 11 km.
    """
    theta = 1.0 - 0.0065 * np.asarray(h, dtype=float) / 288.15
    return 1.225 * theta ** (9.80665 / (0.0065 * 287.05) - 1.0)


def drag_coeff(alpha_deg, p: AeroParams):
    """Quadratic drag polar C_D(alpha); alpha in degrees, bounds enforced."""
    _check_alpha(alpha_deg, p)
    a = np.asarray(alpha_deg) * DEG
    return (p.a2 * a + p.a1) * a + p.a0


def lift_coeff(alpha_deg, p: AeroParams):
    """Linear lift curve C_L(alpha); alpha in degrees, bounds enforced."""
    _check_alpha(alpha_deg, p)
    a = np.asarray(alpha_deg) * DEG
    return p.b1 * a + p.b0


def _check_alpha(alpha_deg, p: AeroParams):
    a = np.asarray(alpha_deg, dtype=float)
    if np.any(a < p.alpha_min_deg) or np.any(a > p.alpha_max_deg):
        raise AlphaOutOfRange(
            f"alpha {alpha_deg} deg outside [{p.alpha_min_deg}, {p.alpha_max_deg}]")


def _stage_kinematics(i: int, plan: FlightPlan):
    if not 0 <= i < plan.n_stages:
        raise IndexError(f"stage {i} outside [0, {plan.n_stages - 1}]")
    v = plan.v[i]
    gam = plan.gamma[i]
    dgam = (plan.gamma[i + 1] - plan.gamma[i]) / plan.delta
    dv2 = (plan.v[i + 1] ** 2 - plan.v[i] ** 2) / plan.delta
    return v, gam, dgam, dv2


def stage_eta(i: int, plan: FlightPlan, p: AeroParams) -> StageEta:
    """Whole-aircraft drive power coefficients for stage i.

    eta2 is strictly positive for any valid plan, so the drive power is
    convex in the mass.
    """
    v, gam, dgam, dv2 = _stage_kinematics(i, plan)
    g = p.grav
    w = v * dgam + g * np.cos(gam)  # lift-side specific load, m/s^2
    eta2 = 2.0 * p.a2 * w * w / (p.b1 ** 2 * p.rho * p.S * v)
    eta1 = (0.5 * dv2 + g * np.sin(gam) * v
            - 2.0 * p.a2 * p.b0 * w * v / p.b1 ** 2
            + (p.a1 / p.b1) * w * v)
    eta0 = 0.5 * p.rho * p.S * v ** 3 * (
        p.a2 * p.b0 ** 2 / p.b1 ** 2 - p.a1 * p.b0 / p.b1 + p.a0)
    return StageEta(eta2=float(eta2), eta1=float(eta1), eta0=float(eta0))


def drive_power(m, eta: StageEta):
    """Drive power (W) at aircraft mass m (kg); convex quadratic in m."""
    return (eta.eta2 * m + eta.eta1) * m + eta.eta0


def recover_alpha(i: int, m: float, plan: FlightPlan, p: AeroParams) -> AlphaRecovery:
    """Solve the lift equation of stage i for the angle of attack.

    Out-of-range angles are reported, not raised, so closed-loop logs stay
    complete; the caller decides what a violation means.
    """
    v, gam, dgam, _ = _stage_kinematics(i, plan)
    cl = (m * v * dgam + m * p.grav * np.cos(gam)) * 2.0 / (p.rho * p.S * v * v)
    alpha_rad = (cl - p.b0) / p.b1
    alpha_deg = float(alpha_rad / DEG)
    ok = p.alpha_min_deg <= alpha_deg <= p.alpha_max_deg
    return AlphaRecovery(alpha_deg=alpha_deg, in_range=bool(ok))
