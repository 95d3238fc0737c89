import json

import pytest

from lambdaq.core.exceptions import ScenarioNotFound, ValidationError
from lambdaq.schemas.scenario import ScenarioCheck
from lambdaq.services.reproduce import SCENARIOS, evaluate_check, load_scenario, lookup, run_many, run_scenario

pytestmark = pytest.mark.service

PAYLOAD = {
    "root": -0.5,
    "step_pattern": "BBNN",
    "converged": True,
    "isolation": {"candidates": [{"lo": -1.6}, {"lo": -0.9}], "leading_range": [-0.03, 0.01]},
    "residual": None,
}


@pytest.mark.parametrize("name", SCENARIOS)
def test_bundled_scenarios_load(name):
    scenario = load_scenario(name)
    assert scenario.name == name
    runs = {run.name for run in scenario.runs}
    assert scenario.checks
    assert all(check.run in runs for check in scenario.checks)


def test_unknown_scenario():
    with pytest.raises(ScenarioNotFound):
        load_scenario("nope")


def test_malformed_scenario(tmp_path):
    (tmp_path / "broken.json").write_text('{"name": "broken"', encoding="utf-8")
    with pytest.raises(ValidationError):
        load_scenario("broken", tmp_path)


def test_lookup():
    assert lookup(PAYLOAD, "isolation.candidates.1.lo") == -0.9
    assert lookup(PAYLOAD, "isolation.leading_range.0") == -0.03
    assert lookup(PAYLOAD, "missing.path") is lookup(PAYLOAD, "root.deeper")


@pytest.mark.parametrize(
    "op, path, value, tol, passed",
    [
        ("approx", "root", -0.5001, 1e-3, True),
        ("approx", "root", -0.6, 1e-3, False),
        ("le", "root", -0.5, None, True),
        ("ge", "root", 0.0, None, False),
        ("eq", "converged", True, None, True),
        ("matches", "step_pattern", "^B+N+$", None, True),
        ("matches", "step_pattern", "^N+$", None, False),
        ("count", "isolation.candidates", 2, None, True),
        ("approx", "residual", 0.0, 1.0, False),
        ("eq", "not.there", 1, None, False),
        ("le", "step_pattern", 3, None, False),
    ],
)
def test_check_ops(op, path, value, tol, passed):
    check = ScenarioCheck(run="r", path=path, op=op, value=value, tol=tol)
    result = evaluate_check(check, PAYLOAD)
    assert result.passed is passed
    assert result.expected == value


def test_count_reports_length():
    check = ScenarioCheck(run="r", path="isolation.candidates", op="count", value=3)
    result = evaluate_check(check, PAYLOAD)
    assert not result.passed
    assert result.actual == 2


def test_run_example(tmp_path):
    outcome = run_scenario("example1", tmp_path)
    assert outcome.passed
    target = tmp_path / "example1"
    checks = json.loads((target / "checks.json").read_text(encoding="utf-8"))
    assert checks["passed"] is True
    assert len(checks["checks"]) == 5
    result = json.loads((target / "quantile.json").read_text(encoding="utf-8"))
    assert result["root"] == pytest.approx(-0.519755, abs=1e-5)


@pytest.mark.parametrize("name", ["student_t", "dweibull", "disc1", "disc2", "interval"])
def test_quantile_scenarios_pass(tmp_path, name):
    outcome = run_scenario(name, tmp_path)
    failed = [f"{c.run}.{c.path} {c.op} {c.expected} got {c.actual}" for c in outcome.checks if not c.passed]
    assert not failed


@pytest.mark.slow
@pytest.mark.parametrize("name", ["two_asset", "three_asset_normal", "three_asset_t"])
def test_portfolio_scenarios_pass(tmp_path, name):
    outcome = run_scenario(name, tmp_path)
    failed = [f"{c.run}.{c.path} {c.op} {c.expected} got {c.actual}" for c in outcome.checks if not c.passed]
    assert not failed
    assert any(p.suffix == ".csv" for p in (tmp_path / name).iterdir())


def test_invalid_run_config(tmp_path):
    scenario = {
        "name": "bad",
        "runs": [{"name": "q", "command": "quantile", "config": {"distribution": {"kind": "cauchy"}}}],
        "checks": [{"run": "q", "path": "root", "op": "le", "value": 0}],
    }
    (tmp_path / "bad.json").write_text(json.dumps(scenario), encoding="utf-8")
    with pytest.raises(ValidationError):
        run_scenario("bad", tmp_path / "out", scenario_dir=tmp_path)


def test_parallel_runs_match_sequential_runs(tmp_path):
    names = ["disc2", "example1", "student_t"]
    sequential = run_many(names, tmp_path / "seq")
    parallel = run_many(names, tmp_path / "par", workers=3)
    assert [o.name for o in parallel] == names
    assert [o.model_dump() for o in parallel] == [o.model_dump() for o in sequential]
    for name in names:
        assert (tmp_path / "par" / name / "checks.json").read_text(encoding="utf-8") == (
            tmp_path / "seq" / name / "checks.json"
        ).read_text(encoding="utf-8")


def test_parallel_run_rejects_unknown_scenario_up_front(tmp_path):
    with pytest.raises(ScenarioNotFound):
        run_many(["example1", "nope"], tmp_path, workers=2)
    assert not (tmp_path / "example1").exists()


def test_workers_must_be_positive(tmp_path):
    with pytest.raises(ValidationError):
        run_many(["example1"], tmp_path, workers=0)
