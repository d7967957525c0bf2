"""Quasi-static powertrain component models.

Gas turbine and electric motor are represented by convex quadratic maps
(fuel rate vs shaft power, electrical draw vs shaft power).  The battery is
an equivalent circuit with constant open-circuit voltage U and internal
resistance R, giving the forward map

    g(p_em) = (U^2 / 2R) * (1 - sqrt(1 - (4R/U^2) * h(p_em)))

from motor shaft power to battery discharge power, and a closed-form
inverse g^-1 used by the convex optimal control formulation.

All quantities are SI (W, J, kg, s).  Table-style data quoted in MJ/MW is
converted at ingestion, never inside these functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleBatteryDraw, OutOfRange

# Loss-map curvature below this magnitude is treated as exactly zero so the
# inverse routes to the affine branch instead of a catastrophically
# cancelling square root.
KAPPA2_ZERO_TOL = 1e-15

# Radicands within this relative distance below zero are clamped to zero
# (feasibility boundary); anything further out raises.
RADICAND_REL_TOL = 1e-9


@dataclass(frozen=True)
class FuelMapCoeffs:
    """Quadratic fuel map f(p) = beta2*p^2 + beta1*p + beta0, SI units."""

    beta2: float  # kg s^-1 W^-2
    beta1: float  # kg s^-1 W^-1
    beta0: float  # kg s^-1

    def __post_init__(self):
        if self.beta2 < 0.0:
            raise ValueError(f"beta2 must be >= 0, got {self.beta2}")
        if self.beta1 <= 0.0:
            raise ValueError(f"beta1 must be > 0, got {self.beta1}")


@dataclass(frozen=True)
class LossMapCoeffs:
    """Quadratic loss map h(p) = kappa2*p^2 + kappa1*p + kappa0."""

    kappa2: float  # 1/W
    kappa1: float  # dimensionless
    kappa0: float  # W

    def __post_init__(self):
        if self.kappa2 < 0.0:
            raise ValueError(f"kappa2 must be >= 0, got {self.kappa2}")
        if self.kappa1 <= 0.0:
            raise ValueError(f"kappa1 must be > 0, got {self.kappa1}")


@dataclass(frozen=True)
class BatteryParams:
    """Equivalent-circuit battery with a fixed safe SOC band."""

    U: float      # open-circuit voltage, V
    R: float      # internal resistance, ohm
    E_min: float  # J
    E_max: float  # J

    def __post_init__(self):
        if self.U <= 0.0:
            raise ValueError(f"U must be > 0, got {self.U}")
        if self.R <= 0.0:
            raise ValueError(f"R must be > 0, got {self.R}")
        if not self.E_min < self.E_max:
            raise ValueError(f"need E_min < E_max, got [{self.E_min}, {self.E_max}]")

    @property
    def max_bus_power(self) -> float:
        """Largest electrical draw the circuit can deliver, U^2/(4R)."""
        return self.U * self.U / (4.0 * self.R)


@dataclass(frozen=True)
class PowerLimits:
    """Per-arrangement shaft power bounds for gas turbine and electric motor."""

    p_gt_min: float  # W
    p_gt_max: float  # W
    p_em_min: float  # W
    p_em_max: float  # W

    def __post_init__(self):
        if self.p_gt_min > self.p_gt_max:
            raise ValueError("p_gt_min > p_gt_max")
        if self.p_em_min > self.p_em_max:
            raise ValueError("p_em_min > p_em_max")


def eval_fuel_rate(p_gt, c: FuelMapCoeffs):
    """Fuel mass flow (kg/s) at gas-turbine shaft power p_gt (W).

    Accepts scalars or arrays; defined for all real p_gt, callers enforce
    power bounds.
    """
    return (c.beta2 * p_gt + c.beta1) * p_gt + c.beta0


def eval_electrical_draw(p_em, c: LossMapCoeffs):
    """Electrical bus power h(p_em) (W) at motor shaft power p_em (W)."""
    return (c.kappa2 * p_em + c.kappa1) * p_em + c.kappa0


def battery_power(p_em, c: LossMapCoeffs, b: BatteryParams):
    """Battery discharge power g(p_em) (W); negative values recharge.

    Raises InfeasibleBatteryDraw when h(p_em) exceeds the maximum
    deliverable power U^2/(4R) beyond the boundary clamp tolerance.
    """
    h = eval_electrical_draw(p_em, c)
    scale = b.U * b.U / (2.0 * b.R)
    arg = 1.0 - h / (0.5 * scale)
    arg = _clamp_radicand(arg, "battery_power", InfeasibleBatteryDraw)
    return scale * (1.0 - np.sqrt(arg))


def battery_inverse(p_b, c: LossMapCoeffs, b: BatteryParams):
    """Motor shaft power g^-1(p_b) (W) producing battery power p_b (W).

    Exact inverse of battery_power on the monotone branch
    p_em >= -kappa1/(2*kappa2).  Two closed forms: a square-root expression
    for kappa2 > 0 and a quadratic over kappa1 when kappa2 vanishes.
    Raises OutOfRange when p_b lies outside the image of g.
    """
    rr = b.R / (b.U * b.U)
    # h value consistent with p_b through the equivalent circuit
    h = p_b - rr * np.square(p_b)
    if c.kappa2 < KAPPA2_ZERO_TOL:
        return (h - c.kappa0) / c.kappa1
    rad = (h - c.kappa0) / c.kappa2 + (c.kappa1 / (2.0 * c.kappa2)) ** 2
    rad = _clamp_radicand(rad, "battery_inverse", OutOfRange)
    return -c.kappa1 / (2.0 * c.kappa2) + np.sqrt(rad)


def effective_em_lower_bound(c: LossMapCoeffs, limits: PowerLimits) -> float:
    """Lower motor power bound keeping g one-to-one: max(-p_em_max, -k1/2k2).

    For kappa2 = 0 the loss map is affine increasing, so only the symmetric
    -p_em_max clamp applies.
    """
    if c.kappa2 < KAPPA2_ZERO_TOL:
        return -limits.p_em_max
    return max(-limits.p_em_max, -c.kappa1 / (2.0 * c.kappa2))


def _clamp_radicand(arg, where: str, exc):
    """Clamp tiny negative radicands to zero, raise `exc` for real violations."""
    a = np.asarray(arg, dtype=float)
    scale = np.maximum(1.0, np.abs(a))
    bad = a < -RADICAND_REL_TOL * scale
    if np.any(bad):
        worst = float(np.min(a))
        raise exc(f"{where}: negative radicand {worst:.6g}")
    out = np.maximum(a, 0.0)
    if np.isscalar(arg) or np.ndim(arg) == 0:
        return float(out)
    return out
