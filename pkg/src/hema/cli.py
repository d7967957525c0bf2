"""Operator entry point: scenario runs, validation dry-runs, comparisons.

Exit codes: 0 success, 1 comparison/ordering failure, 2 configuration
error, 3 solver infeasibility, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys

import numpy as np

from . import __version__
from .errors import (HemaError, MismatchedScenario, MissionInfeasible,
                     OrderingViolation, ScenarioError)
from .kernels import backend_name
from .ocp import STATUS_OPTIMAL, Tolerances, assemble, \
    brute_force_reference, oracle_grid_slack, recovery_report, solve
from .ocp.oracle import random_instance
from .scenarios import RunReport, build_report, compare, load_scenario
from .scheduling import schedule

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hema",
        description="Hybrid-electric aircraft energy management: optimal "
                    "power-split missions and heuristic baselines.")
    ap.add_argument("--version", action="version", version=f"hema {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", default="default",
                       help="bundled scenario name or path to an .ini file")
        p.add_argument("--delta-s", type=float, default=None,
                       help="resample the flight plan to this step (s)")
        p.add_argument("--lambda-kg-per-MJ", type=float, default=None,
                       dest="lam", help="override the terminal-SOC weight")
        p.add_argument("--seed", type=int, default=None,
                       help="seed for randomized self-checks only")

    run = sub.add_parser("run", help="execute a mission and write logs/report")
    common(run)
    run.add_argument("--strategy", choices=("mpc", "cdcs", "gt-only"),
                     default="mpc")
    run.add_argument("--baseline-of", choices=("mpc", "cdcs", "gt-only"),
                     default=None, metavar="STRATEGY",
                     help="also run STRATEGY and report its saving against "
                          "this run as the baseline")
    run.add_argument("--out", default="hema_out", help="output directory")

    val = sub.add_parser("validate", help="parse, schedule and solve the "
                                          "first-step problem only")
    common(val)

    cmp_ = sub.add_parser("compare", help="tabulate reports from prior runs")
    cmp_.add_argument("reports", nargs="+", help="RunReport JSON files")
    cmp_.add_argument("--out", default=None, help="write the table here too")
    return ap


def _strategy_key(s: str) -> str:
    return s.replace("-", "_")


def _write_run_outputs(out_dir: pathlib.Path, scenario, logs, reports):
    out_dir.mkdir(parents=True, exist_ok=True)
    for strat, log in logs.items():
        stem = f"{scenario.id}_{strat}"
        log.to_csv(out_dir / f"{stem}_log.csv")
        (out_dir / f"{stem}_summary.json").write_text(log.summary_json())
    for strat, report in reports.items():
        (out_dir / f"{scenario.id}_{strat}_report.json").write_text(report.to_json())


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario, delta_s=args.delta_s,
                             lam_kg_per_MJ=args.lam)
    base_strat = _strategy_key(args.strategy)
    subject = _strategy_key(args.baseline_of) if args.baseline_of else base_strat

    logs = {base_strat: scenario.run(base_strat)}
    if subject != base_strat:
        logs[subject] = scenario.run(subject)

    baseline_log = logs[base_strat] if subject != base_strat else None
    reports = {subject: build_report(scenario, logs[subject],
                                     baseline_log=baseline_log)}
    if subject != base_strat:
        reports[base_strat] = build_report(scenario, logs[base_strat])
    report = reports[subject]
    _write_run_outputs(pathlib.Path(args.out), scenario, logs, reports)

    print(f"scenario {scenario.id} ({scenario.description})")
    if scenario.fuel_scale != 1.0:
        print(f"  calibrated beta1 scale: {scenario.fuel_scale:.4f}")
    for strat, log in logs.items():
        s = log.summary
        print(f"  {strat:8s}: fuel {s['total_fuel_kg']:9.2f} kg, final SOC "
              f"{s['final_soc_J'] / 1e6:7.2f} MJ, max|alpha| "
              f"{s['max_abs_alpha_deg']:.2f} deg, "
              f"mean solve {log.timing['mean_solve_s'] * 1e3:.1f} ms")
    if report.fuel_saving_vs_baseline_pct is not None:
        print(f"  saving of {subject} vs {base_strat}: "
              f"{report.fuel_saving_vs_baseline_pct:.2f} %")
    print(f"  outputs in {args.out}/ (solver backend: {backend_name()})")
    return EXIT_OK


def _cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario, delta_s=args.delta_s,
                             lam_kg_per_MJ=args.lam)
    stages = schedule(scenario.plan, scenario.m0, scenario.fan_map,
                      scenario.table, scenario.limits, scenario.aero,
                      scenario.battery)
    prob = assemble(stages, scenario.m0, scenario.E0, scenario.battery,
                    scenario.limits, lam=scenario.lam)
    sol = solve(prob)
    print(f"scenario {scenario.id}: parsed OK, {stages.n_stages} stages, "
          f"horizon N0 = {prob.N}")
    print(f"  k=0 solve: {sol.status} in {sol.iterations} iterations, "
          f"objective {sol.objective_kg:.3f} kg, predicted fuel "
          f"{sol.fuel_kg:.3f} kg")
    print(f"  residuals: primal {sol.kkt_residuals['primal']:.2e}, dual "
          f"{sol.kkt_residuals['dual']:.2e}, gap {sol.kkt_residuals['gap']:.2e}")
    rec = recovery_report(prob, sol)
    print(f"  equality recovery: mass rows {rec['mass_rel']:.2e} rel, drive rows "
          f"{rec['power_rel']:.2e} rel over {rec['interior_stages']} interior stages")
    if args.seed is not None:
        rng = np.random.default_rng(args.seed)
        tight = Tolerances(feas=1e-12, opt=1e-12)
        worst = 0.0
        for _ in range(5):
            p = random_instance(rng)
            s = solve(p, tol=tight, max_iter=200)
            ref = brute_force_reference(p, grid_size=40)
            gap = s.objective_kg - ref  # must be <= 0 up to tolerance
            worst = max(worst, gap)
            if not (s.status == STATUS_OPTIMAL
                    and gap <= 1e-6
                    and ref - s.objective_kg <= oracle_grid_slack(p, 40) + 1e-6):
                print(f"  oracle cross-check FAILED: {s.objective_kg} vs {ref}")
                return EXIT_FAIL
        print(f"  oracle cross-check (5 instances, seed {args.seed}): OK, "
              f"max solver-minus-oracle {worst:.2e} kg")
    if sol.status != STATUS_OPTIMAL:
        print(f"  solve failed: {sol.message}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_compare(args) -> int:
    reports = []
    for path in args.reports:
        reports.append(RunReport.from_json(pathlib.Path(path).read_text()))
    table = compare(reports)
    print(table, end="")
    if args.out:
        pathlib.Path(args.out).write_text(table)
    return EXIT_OK


def main(argv=None) -> int:
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on bad flags, 0 on --help/--version
        return int(e.code) if e.code else EXIT_OK

    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "validate":
            return _cmd_validate(args)
        return _cmd_compare(args)
    except ScenarioError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except MissionInfeasible as e:
        print(f"solver infeasibility: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (MismatchedScenario, OrderingViolation) as e:
        print(f"comparison failure: {e}", file=sys.stderr)
        return EXIT_FAIL
    except (OSError, json.JSONDecodeError) as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except HemaError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
