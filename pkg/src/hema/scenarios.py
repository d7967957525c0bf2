"""Scenario file ingestion and run reporting.

A scenario is a single INI file with explicit units in the key names; the
four bundled ones cover the baseline mission plus the windmilling,
heavy-fuel and saturated-turbine studies.  Referenced data files use the
``data:`` prefix for package-bundled CSVs or plain paths (absolute, or
relative to the scenario file).

Resolution order for ``--scenario NAME``: an existing path wins, then
``$HEMA_SCENARIO_DIR/NAME.ini``, then the bundled set.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import os
import pathlib
from dataclasses import dataclass, field
from importlib import resources

from . import control
from . import flight_dynamics as fd
from . import powertrain as pt
from .errors import MismatchedScenario, OrderingViolation, ScenarioError
from .scheduling import CoeffTable, FanMap

SCENARIO_DIR_ENV = "HEMA_SCENARIO_DIR"
BUNDLED = ("default", "windmilling", "heavy_fuel", "saturated")


def _data_root():
    return resources.files("hema") / "data"


def resolve_scenario_path(name_or_path: str) -> pathlib.Path:
    p = pathlib.Path(name_or_path)
    if p.is_file():
        return p
    env_dir = os.environ.get(SCENARIO_DIR_ENV)
    if env_dir:
        cand = pathlib.Path(env_dir) / f"{name_or_path}.ini"
        if cand.is_file():
            return cand
    bundled = _data_root() / "scenarios" / f"{name_or_path}.ini"
    if bundled.is_file():
        return pathlib.Path(str(bundled))
    raise ScenarioError(
        f"scenario {name_or_path!r} not found (tried path, "
        f"${SCENARIO_DIR_ENV}, bundled {BUNDLED})")


def _resolve_file(ref: str, base: pathlib.Path) -> pathlib.Path:
    if ref.startswith("data:"):
        return pathlib.Path(str(_data_root() / ref[len("data:"):]))
    p = pathlib.Path(ref)
    return p if p.is_absolute() else base / p


@dataclass
class Scenario:
    """Fully materialised scenario: parsed files plus typed parameters."""

    id: str
    description: str
    path: pathlib.Path
    plan: fd.FlightPlan
    aero: fd.AeroParams
    battery: pt.BatteryParams
    limits: pt.PowerLimits
    fan_map: FanMap
    table: CoeffTable
    m0: float
    E0: float
    dry_mass: float
    lam: float              # kg/J
    fuel_scale: float = 1.0  # calibrated beta1 multiplier (heavy-fuel study)
    plan_digest: str = ""

    def run(self, strategy: str, keep_solutions: bool = False) -> control.MissionLog:
        cfg = control.StrategyConfig(strategy=strategy, lam=self.lam,
                                     keep_solutions=keep_solutions,
                                     dry_mass_floor=self.dry_mass)
        return control.run_mission(self.plan, self.aero, self.battery,
                                   self.limits, self.fan_map, self.table,
                                   self.m0, self.E0, cfg)


def _get(cfg, section, key, cast=float):
    try:
        raw = cfg.get(section, key)
    except (configparser.NoSectionError, configparser.NoOptionError) as e:
        raise ScenarioError(f"missing [{section}] {key}: {e}") from e
    try:
        return cast(raw)
    except ValueError as e:
        raise ScenarioError(f"bad value for [{section}] {key}: {raw!r}") from e


def load_scenario(name_or_path: str, delta_s: float | None = None,
                  lam_kg_per_MJ: float | None = None) -> Scenario:
    """Parse, validate and materialise a scenario.

    `delta_s` resamples the flight plan; `lam_kg_per_MJ` overrides the
    terminal-SOC weight.  Heavy-fuel scenarios calibrate their beta1 scale
    here (deterministic bisection on the stage-0 optimum).
    """
    path = resolve_scenario_path(name_or_path)
    cfg = configparser.ConfigParser(inline_comment_prefixes=("#", ";"),
                                    interpolation=None)
    try:
        with open(path) as f:
            cfg.read_file(f)
    except (OSError, configparser.Error) as e:
        raise ScenarioError(f"cannot read scenario {path}: {e}") from e

    base = path.parent
    plan_path = _resolve_file(_get(cfg, "files", "plan", str), base)
    fan_path = _resolve_file(_get(cfg, "files", "fan_map", str), base)
    coeff_path = _resolve_file(_get(cfg, "files", "coeff_table", str), base)
    for p in (plan_path, fan_path, coeff_path):
        if not p.is_file():
            raise ScenarioError(f"referenced file missing: {p}")

    delta = delta_s if delta_s is not None else _get(cfg, "mission", "delta_s")
    try:
        plan = fd.FlightPlan.from_csv(plan_path, delta=delta)
        fan_map = FanMap.from_csv(fan_path,
                                  mach=_get(cfg, "fan", "mach"),
                                  c_p=_get(cfg, "fan", "c_p_J_per_kgK"))
        table = CoeffTable.from_csv(coeff_path)
    except ValueError as e:
        raise ScenarioError(str(e)) from e

    battery = pt.BatteryParams(
        U=_get(cfg, "battery", "U_V"),
        R=_get(cfg, "battery", "R_ohm"),
        E_min=_get(cfg, "battery", "E_min_MJ") * 1e6,
        E_max=_get(cfg, "battery", "E_max_MJ") * 1e6,
    )
    limits = pt.PowerLimits(
        p_gt_min=_get(cfg, "limits", "p_gt_min_MW") * 1e6,
        p_gt_max=_get(cfg, "limits", "p_gt_max_MW") * 1e6,
        p_em_min=_get(cfg, "limits", "p_em_min_MW") * 1e6,
        p_em_max=_get(cfg, "limits", "p_em_max_MW") * 1e6,
    )
    aero = fd.AeroParams.from_degree_fits(
        a0=_get(cfg, "aero", "a0"),
        a1_per_deg=_get(cfg, "aero", "a1_per_deg"),
        a2_per_deg2=_get(cfg, "aero", "a2_per_deg2"),
        b0=_get(cfg, "aero", "b0"),
        b1_per_deg=_get(cfg, "aero", "b1_per_deg"),
        S=_get(cfg, "aero", "S_m2"),
        rho=_get(cfg, "aero", "rho_kg_m3"),
        grav=_get(cfg, "aero", "g_m_s2"),
        alpha_min_deg=_get(cfg, "aero", "alpha_min_deg"),
        alpha_max_deg=_get(cfg, "aero", "alpha_max_deg"),
        n_arrangements=_get(cfg, "aero", "n_arrangements", int),
    )
    m0 = _get(cfg, "mission", "m0_kg")
    e0 = _get(cfg, "mission", "E0_MJ") * 1e6
    dry = _get(cfg, "mission", "dry_mass_kg")
    lam = (_get(cfg, "strategy", "lambda_kg_per_MJ")
           if lam_kg_per_MJ is None else lam_kg_per_MJ) * 1e-6

    fuel_scale = 1.0
    if cfg.has_section("fuel") and cfg.has_option("fuel", "target_mass_change_frac"):
        target = _get(cfg, "fuel", "target_mass_change_frac")
        fuel_scale = control.calibrate_fuel_scale(
            plan, aero, battery, limits, fan_map, table, m0, e0, target, lam=lam)
        table = table.scaled(beta1_scale=fuel_scale)

    digest = hashlib.sha256(plan_path.read_bytes()).hexdigest()[:16]
    return Scenario(id=_get(cfg, "scenario", "id", str),
                    description=cfg.get("scenario", "description", fallback=""),
                    path=path, plan=plan, aero=aero, battery=battery,
                    limits=limits, fan_map=fan_map, table=table,
                    m0=m0, E0=e0, dry_mass=dry, lam=lam,
                    fuel_scale=fuel_scale, plan_digest=digest)


@dataclass
class RunReport:
    """Per-run summary for operators; numbers recomputed from the log."""

    scenario_id: str
    plan_digest: str
    strategy: str
    total_fuel_kg: float
    final_soc_MJ: float
    min_soc_MJ: float
    max_abs_alpha_deg: float
    steps: int
    horizon_start: int
    mean_solve_s: float
    max_solve_s: float
    baseline_strategy: str | None = None
    baseline_fuel_kg: float | None = None
    fuel_saving_vs_baseline_pct: float | None = None
    fuel_scale: float = 1.0

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        d = json.loads(text)
        return cls(**d)


def build_report(scenario: Scenario, log: control.MissionLog,
                 baseline_log: control.MissionLog | None = None) -> RunReport:
    """Assemble the report for `log`, optionally against a baseline run.

    Savings are recomputed from the two logs here, never re-entered:
    (F_baseline - F) / F_baseline.
    """
    s = log.summary
    t = log.timing
    rep = RunReport(
        scenario_id=scenario.id,
        plan_digest=scenario.plan_digest,
        strategy=log.strategy,
        total_fuel_kg=s["total_fuel_kg"],
        final_soc_MJ=s["final_soc_J"] / 1e6,
        min_soc_MJ=s["min_soc_J"] / 1e6,
        max_abs_alpha_deg=s["max_abs_alpha_deg"],
        steps=s["steps"],
        horizon_start=s["steps"],
        mean_solve_s=t["mean_solve_s"],
        max_solve_s=t["max_solve_s"],
        fuel_scale=scenario.fuel_scale,
    )
    if baseline_log is not None:
        fb = baseline_log.summary["total_fuel_kg"]
        rep.baseline_strategy = baseline_log.strategy
        rep.baseline_fuel_kg = fb
        rep.fuel_saving_vs_baseline_pct = 100.0 * (fb - rep.total_fuel_kg) / fb
    return rep


def compare(reports: list[RunReport]) -> str:
    """Aligned comparison table over runs of one scenario.

    Raises MismatchedScenario when the reports do not share a scenario and
    plan, and OrderingViolation when an MPC run burns more fuel than any
    heuristic in the set (a hard failure, not a formatting question).
    """
    if len(reports) < 2:
        raise MismatchedScenario("need at least two reports to compare")
    ids = {(r.scenario_id, r.plan_digest) for r in reports}
    if len(ids) > 1:
        raise MismatchedScenario(f"reports span different scenarios/plans: {ids}")

    rows = sorted(reports, key=lambda r: (r.strategy != "mpc", r.strategy))
    ref = rows[0].total_fuel_kg
    lines = [f"scenario: {rows[0].scenario_id}  (plan {rows[0].plan_digest})",
             f"{'strategy':<10} {'fuel_kg':>10} {'final_SOC_MJ':>13} "
             f"{'saving_vs_first_%':>18}"]
    for r in rows:
        saving = 100.0 * (r.total_fuel_kg - ref) / r.total_fuel_kg if r is not rows[0] else 0.0
        lines.append(f"{r.strategy:<10} {r.total_fuel_kg:>10.2f} "
                     f"{r.final_soc_MJ:>13.2f} {saving:>18.3f}")
    mpc = [r for r in rows if r.strategy == "mpc"]
    if mpc:
        worst = min(r.total_fuel_kg for r in rows)
        if mpc[0].total_fuel_kg > worst + 1e-9:
            others = {r.strategy: r.total_fuel_kg for r in rows if r.strategy != "mpc"}
            raise OrderingViolation(
                f"mpc fuel {mpc[0].total_fuel_kg:.3f} kg exceeds a heuristic's "
                f"({others})")
    return "\n".join(lines) + "\n"
