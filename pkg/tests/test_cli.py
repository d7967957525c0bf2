import json

import pytest

from hema.cli import main
from hema.scenarios import RunReport, compare, load_scenario
from hema.errors import MismatchedScenario, OrderingViolation, ScenarioError


def test_run_writes_all_outputs(tmp_path):
    out = tmp_path / "out"
    rc = main(["run", "--scenario", "default", "--strategy", "mpc",
               "--delta-s", "60", "--out", str(out)])
    assert rc == 0
    log = out / "default_mpc_log.csv"
    summary = out / "default_mpc_summary.json"
    report = out / "default_mpc_report.json"
    assert log.is_file() and summary.is_file() and report.is_file()
    s = json.loads(summary.read_text())
    assert s["steps"] == 60
    r = json.loads(report.read_text())
    assert r["strategy"] == "mpc"
    assert r["fuel_saving_vs_baseline_pct"] is None


def test_run_with_baseline_reports_saving(tmp_path):
    out = tmp_path / "out"
    rc = main(["run", "--scenario", "default", "--strategy", "cdcs",
               "--baseline-of", "mpc", "--delta-s", "60", "--out", str(out)])
    assert rc == 0
    rep = RunReport.from_json((out / "default_mpc_report.json").read_text())
    assert rep.baseline_strategy == "cdcs"
    assert rep.fuel_saving_vs_baseline_pct is not None
    assert rep.fuel_saving_vs_baseline_pct > 0  # optimiser beats the heuristic
    assert (out / "default_cdcs_log.csv").is_file()


def test_run_determinism_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["run", "--scenario", "default", "--strategy", "mpc",
                     "--delta-s", "60", "--out", str(out)]) == 0
    assert (a / "default_mpc_log.csv").read_bytes() == \
        (b / "default_mpc_log.csv").read_bytes()
    assert (a / "default_mpc_summary.json").read_bytes() == \
        (b / "default_mpc_summary.json").read_bytes()


def test_validate_default():
    assert main(["validate", "--scenario", "default", "--delta-s", "120"]) == 0


def test_validate_with_seeded_oracle_smoke():
    assert main(["validate", "--scenario", "default", "--delta-s", "120",
                 "--seed", "5"]) == 0


def test_missing_scenario_is_config_error(capsys):
    assert main(["validate", "--scenario", "no_such_thing"]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_broken_scenario_file_is_config_error(tmp_path):
    bad = tmp_path / "broken.ini"
    bad.write_text("[scenario]\nid = broken\n")  # everything else missing
    assert main(["validate", "--scenario", str(bad)]) == 2


def test_infeasible_scenario_exits_3(tmp_path):
    # starved powertrain: demand greatly exceeds combined ratings
    ini = tmp_path / "starved.ini"
    import importlib.resources as res
    bundled = res.files("hema") / "data" / "scenarios" / "default.ini"
    text = bundled.read_text()
    text = text.replace("id = default", "id = starved")
    text = text.replace("p_gt_max_MW = 5.0", "p_gt_max_MW = 0.4")
    text = text.replace("p_em_max_MW = 2.0", "p_em_max_MW = 0.1")
    ini.write_text(text)
    assert main(["run", "--scenario", str(ini), "--strategy", "mpc",
                 "--delta-s", "60", "--out", str(tmp_path / "o")]) == 3


def test_out_collision_is_io_error(tmp_path):
    blocker = tmp_path / "blocked"
    blocker.write_text("a file, not a directory")
    rc = main(["run", "--scenario", "default", "--strategy", "cdcs",
               "--delta-s", "120", "--out", str(blocker)])
    assert rc == 4


def test_compare_command(tmp_path, capsys):
    out = tmp_path / "out"
    main(["run", "--scenario", "default", "--strategy", "cdcs",
          "--baseline-of", "mpc", "--delta-s", "60", "--out", str(out)])
    # mpc report exists; cdcs needs its own report file for compare
    main(["run", "--scenario", "default", "--strategy", "cdcs",
          "--delta-s", "60", "--out", str(out)])
    rc = main(["compare", str(out / "default_mpc_report.json"),
               str(out / "default_cdcs_report.json"),
               "--out", str(out / "table.txt")])
    assert rc == 0
    table = (out / "table.txt").read_text()
    lines = table.strip().splitlines()
    assert lines[2].startswith("mpc")  # optimiser row first
    assert "cdcs" in lines[3]


def test_compare_self_zero_saving(tmp_path):
    out = tmp_path / "out"
    main(["run", "--scenario", "default", "--strategy", "cdcs",
          "--delta-s", "120", "--out", str(out)])
    rep = RunReport.from_json((out / "default_cdcs_report.json").read_text())
    table = compare([rep, rep])
    saving = float(table.strip().splitlines()[-1].split()[-1])
    assert saving == 0.0


def test_compare_mismatched_scenarios():
    a = RunReport(scenario_id="default", plan_digest="aaaa", strategy="mpc",
                  total_fuel_kg=1.0, final_soc_MJ=1.0, min_soc_MJ=1.0,
                  max_abs_alpha_deg=1.0, steps=1, horizon_start=1,
                  mean_solve_s=0.0, max_solve_s=0.0)
    b = RunReport(scenario_id="other", plan_digest="bbbb", strategy="cdcs",
                  total_fuel_kg=1.0, final_soc_MJ=1.0, min_soc_MJ=1.0,
                  max_abs_alpha_deg=1.0, steps=1, horizon_start=1,
                  mean_solve_s=0.0, max_solve_s=0.0)
    with pytest.raises(MismatchedScenario):
        compare([a, b])


def test_compare_flags_ordering_violation():
    base = dict(scenario_id="default", plan_digest="aaaa",
                final_soc_MJ=1.0, min_soc_MJ=1.0, max_abs_alpha_deg=1.0,
                steps=1, horizon_start=1, mean_solve_s=0.0, max_solve_s=0.0)
    mpc = RunReport(strategy="mpc", total_fuel_kg=120.0, **base)
    heur = RunReport(strategy="cdcs", total_fuel_kg=100.0, **base)
    with pytest.raises(OrderingViolation):
        compare([mpc, heur])


def test_lambda_override_flag(tmp_path):
    out = tmp_path / "out"
    rc = main(["run", "--scenario", "default", "--strategy", "mpc",
               "--delta-s", "120", "--lambda-kg-per-MJ", "0.5",
               "--out", str(out)])
    assert rc == 0
    s = json.loads((out / "default_mpc_summary.json").read_text())
    # a strong terminal-SOC reward hoards charge instead of depleting it
    assert s["final_soc_J"] > 900e6


def test_scenario_dir_env(tmp_path, monkeypatch):
    import importlib.resources as res
    bundled = (res.files("hema") / "data" / "scenarios" / "default.ini").read_text()
    custom = tmp_path / "mine.ini"
    custom.write_text(bundled.replace("id = default", "id = mine"))
    monkeypatch.setenv("HEMA_SCENARIO_DIR", str(tmp_path))
    sc = load_scenario("mine")
    assert sc.id == "mine"


def test_bundled_scenarios_all_parse():
    for name in ("default", "windmilling", "saturated"):
        sc = load_scenario(name)
        assert sc.plan.n_stages == 360
    with pytest.raises(ScenarioError):
        load_scenario("data/../nope")
