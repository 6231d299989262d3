"""Scenario registry, defaults handling, report determinism, and the CLI."""

import json

import pytest

from convlab.cli import main
from convlab.errors import InvalidParam, UnknownScenario
from convlab.scenarios import (
    DEFAULTS_VERSION,
    RunReport,
    list_scenarios,
    load_defaults,
    run_scenario,
    scenario_names,
)

ALL_NAMES = [
    "prekopa-cex",
    "twisted-nonconvex",
    "lemma1",
    "min-principle",
    "berndtsson-cex",
    "lemma2",
    "lemma3",
    "midpoint-probe",
    "disc-distance",
    "psh-delta",
]


def write_defaults(tmp_path, monkeypatch, mutate=None, version=DEFAULTS_VERSION):
    """Copy the shipped defaults, optionally mutate them, point the env at it."""
    data = json.loads(json.dumps(load_defaults()))  # deep copy
    data["version"] = version
    if mutate is not None:
        mutate(data["scenarios"])
    path = tmp_path / "defaults.json"
    path.write_text(json.dumps(data))
    monkeypatch.setenv("CONVLAB_DEFAULTS", str(path))
    return path


class TestRegistry:
    def test_names_and_summaries(self):
        assert scenario_names() == ALL_NAMES
        listed = dict(list_scenarios())
        assert set(listed) == set(ALL_NAMES)
        assert all(listed[n] for n in ALL_NAMES)

    def test_unknown_scenario(self):
        with pytest.raises(UnknownScenario):
            run_scenario("no-such")

    def test_report_shape(self):
        rep = run_scenario("min-principle")
        assert isinstance(rep, RunReport)
        assert rep.scenario == "min-principle"
        assert rep.passed
        assert all(c.passed for c in rep.checks)
        assert rep.wall_time >= 0.0

    def test_override_applies(self):
        rep = run_scenario("min-principle", {"value_tol": 1e-5})
        assert rep.params["value_tol"] == 1e-5
        assert rep.passed

    def test_unknown_override_rejected(self):
        with pytest.raises(InvalidParam):
            run_scenario("min-principle", {"bogus": 1})

    def test_failing_gate_flips_the_verdict(self):
        rep = run_scenario("min-principle", {"min_violation": 10.0})
        assert not rep.passed
        failed = [c for c in rep.checks if not c.passed]
        assert failed and "violation" in failed[0].name


class TestReports:
    def test_json_is_deterministic_without_wall_time(self):
        a = run_scenario("min-principle").to_json(with_wall_time=False)
        b = run_scenario("min-principle").to_json(with_wall_time=False)
        assert a == b

    def test_wall_time_toggle(self):
        rep = run_scenario("min-principle")
        assert "wall_time" in rep.to_jsonable()
        assert "wall_time" not in rep.to_jsonable(with_wall_time=False)

    def test_json_round_trips(self):
        rep = run_scenario("min-principle")
        doc = json.loads(rep.to_json())
        assert doc["scenario"] == "min-principle"
        assert doc["passed"] is True
        assert all({"name", "passed", "detail"} <= set(c) for c in doc["checks"])


class TestDefaults:
    def test_shipped_defaults_cover_every_scenario(self):
        assert set(load_defaults()["scenarios"]) == set(ALL_NAMES)

    def test_env_override_is_honoured(self, tmp_path, monkeypatch):
        def mutate(sc):
            sc["min-principle"]["value_tol"] = 2e-6
        write_defaults(tmp_path, monkeypatch, mutate)
        rep = run_scenario("min-principle")
        assert rep.params["value_tol"] == 2e-6

    def test_version_mismatch_rejected(self, tmp_path, monkeypatch):
        write_defaults(tmp_path, monkeypatch, version=DEFAULTS_VERSION + 1)
        with pytest.raises(InvalidParam):
            load_defaults()

    def test_missing_scenario_rejected(self, tmp_path, monkeypatch):
        def mutate(sc):
            del sc["lemma3"]
        write_defaults(tmp_path, monkeypatch, mutate)
        with pytest.raises(InvalidParam):
            load_defaults()

    def test_extra_scenario_rejected(self, tmp_path, monkeypatch):
        def mutate(sc):
            sc["lemma99"] = {}
        write_defaults(tmp_path, monkeypatch, mutate)
        with pytest.raises(InvalidParam):
            load_defaults()


class TestCliRun:
    def test_list(self, capsys):
        assert main(["list"]) == 0
        out = capsys.readouterr().out
        for name in ALL_NAMES:
            assert name in out

    def test_run_pass_exits_zero(self, capsys):
        assert main(["run", "min-principle"]) == 0
        out = capsys.readouterr().out
        assert "[PASS]" in out
        assert "min-principle: PASS" in out

    def test_json_to_stdout(self, capsys):
        assert main(["run", "min-principle", "--json", "-"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["scenario"] == "min-principle"

    def test_json_to_file(self, tmp_path, capsys):
        target = tmp_path / "report.json"
        assert main(["run", "min-principle", "--json", str(target)]) == 0
        assert json.loads(target.read_text())["passed"] is True

    def test_unknown_scenario_is_a_usage_error(self, capsys):
        assert main(["run", "no-such"]) == 3
        assert "no scenario" in capsys.readouterr().err

    def test_missing_name_is_a_usage_error(self, capsys):
        assert main(["run"]) == 3

    def test_name_plus_all_is_a_usage_error(self, capsys):
        assert main(["run", "lemma1", "--all"]) == 3

    def test_bad_subcommand(self, capsys):
        assert main(["frobnicate"]) == 3

    def test_check_failure_exits_one(self, tmp_path, monkeypatch, capsys):
        def mutate(sc):
            sc["min-principle"]["min_violation"] = 10.0
        write_defaults(tmp_path, monkeypatch, mutate)
        assert main(["run", "min-principle"]) == 1
        assert "[FAIL]" in capsys.readouterr().out

    def test_numerical_error_exits_two(self, tmp_path, monkeypatch, capsys):
        # a probe circle of radius 1.5 leaves the bidisc, which surfaces as a
        # domain error from inside the computation, not a usage error
        def mutate(sc):
            sc["psh-delta"]["witness_radius"] = 1.5
        write_defaults(tmp_path, monkeypatch, mutate)
        assert main(["run", "psh-delta"]) == 2
        assert "numerical failure" in capsys.readouterr().err


class TestCliTools:
    def test_marginal_prints_summary(self, capsys):
        code = main(["marginal", "--eps", "0.1", "--lo", "-0.2", "--hi", "0.2", "--n", "5"])
        assert code == 0
        out = capsys.readouterr().out
        assert "samples: 5" in out
        assert "convex: yes" in out

    def test_marginal_writes_csv(self, tmp_path, capsys):
        target = tmp_path / "curve.csv"
        code = main([
            "marginal", "--eps", "0.1", "--lo", "-0.2", "--hi", "0.2",
            "--n", "5", "--csv", str(target),
        ])
        assert code == 0
        lines = target.read_text().strip().split("\n")
        assert lines[0] == "t,value"
        assert len(lines) == 6

    def test_bergman_reports_masses(self, capsys):
        assert main(["bergman", "--eps", "0.3", "--z", "0.0", "0.15", "--moments", "1"]) == 0
        out = capsys.readouterr().out
        assert "divergent" in out

    def test_check_convex_accepts(self, tmp_path, capsys):
        path = tmp_path / "curve.csv"
        ts = [0.1 * i for i in range(11)]
        path.write_text("t,value\n" + "\n".join(f"{t},{t * t}" for t in ts) + "\n")
        assert main(["check-convex", str(path)]) == 0

    def test_check_convex_flags_a_dent(self, tmp_path, capsys):
        path = tmp_path / "curve.csv"
        ts = [0.1 * i for i in range(11)]
        vals = [t * t for t in ts]
        vals[5] += 1.0
        path.write_text("t,value\n" + "\n".join(f"{t},{v}" for t, v in zip(ts, vals)) + "\n")
        assert main(["check-convex", str(path)]) == 1

    def test_check_convex_rejects_garbage(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("wrong,header\n1,2\n")
        assert main(["check-convex", str(path)]) == 3

    def test_check_psh(self, capsys):
        code = main([
            "check-psh", "--eps", "0.3", "--centers", "5",
            "--radii", "0.05", "--angles", "512", "--seed", "7",
        ])
        assert code == 0
