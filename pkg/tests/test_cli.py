import json

import pytest

from lambdaq.cli import main
from lambdaq.services.reproduce import SCENARIOS

pytestmark = pytest.mark.integration


def _run(argv, capsys):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_quantile_example(write_json, scenario_config, capsys):
    config = write_json(scenario_config("example1", "quantile"))
    code, out, _ = _run(["quantile", "--config", config], capsys)
    assert code == 0
    result = json.loads(out)
    assert result["root"] == pytest.approx(-0.519755, abs=1e-5)
    assert result["lambda_var"] == pytest.approx(0.519755, abs=1e-5)
    assert result["converged"] is True


def test_quantile_writes_result_and_trace(write_json, scenario_config, tmp_path, capsys):
    config = write_json(scenario_config("example1", "quantile"))
    out = tmp_path / "results" / "example.json"
    code, stdout, _ = _run(["quantile", "--config", config, "--out", out, "--trace"], capsys)
    assert code == 0
    assert stdout == ""
    result = json.loads(out.read_text(encoding="utf-8"))
    lines = (tmp_path / "results" / "example.trace.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "iter,x,f,step_kind,bracket_left,bracket_right,rejected_newton"
    assert len(lines) == result["trace_length"] + 1


def test_negative_tolerance_is_an_input_error(write_json, scenario_config, capsys):
    config = write_json(scenario_config("example1", "quantile"))
    code, out, err = _run(["quantile", "--config", config, "--eps", "-1"], capsys)
    assert code == 1
    assert out == ""
    assert err.startswith("error: ")
    assert "tol must be positive" in err
    assert len(err.strip().splitlines()) == 1


def test_overrides_reach_the_solver(write_json, scenario_config, capsys):
    config = write_json(scenario_config("example1", "quantile"))
    code, out, _ = _run(["quantile", "--config", config, "--max-iter", "1"], capsys)
    assert code == 2
    assert json.loads(out)["exit_reason"] == "max_iter"


def test_jump_in_lambda_needs_no_newton_steps(write_json, scenario_config, capsys):
    config = write_json(scenario_config("disc2", "quantile"))
    code, out, _ = _run(["quantile", "--config", config], capsys)
    assert code == 0
    assert json.loads(out)["newton_steps"] == 0


@pytest.mark.parametrize("content", ["{not json", "[1, 2]"])
def test_malformed_config(tmp_path, content, capsys):
    path = tmp_path / "bad.json"
    path.write_text(content, encoding="utf-8")
    code, _, err = _run(["quantile", "--config", path], capsys)
    assert code == 1
    assert err.startswith("error: ")


def test_config_with_invalid_utf8(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_bytes(b"\xff\xfe{\"distribution\": 1}")
    code, out, err = _run(["quantile", "--config", path], capsys)
    assert code == 1
    assert out == ""
    assert err.startswith("error: ")
    assert "not valid UTF-8" in err
    assert len(err.strip().splitlines()) == 1


def test_missing_config(tmp_path, capsys):
    code, _, err = _run(["quantile", "--config", tmp_path / "missing.json"], capsys)
    assert code == 1
    assert "cannot read config" in err


def test_empirical_from_csv(tmp_path, write_json, capsys):
    (tmp_path / "samples.csv").write_text("loss\n" + "\n".join(str(v) for v in range(10, 0, -1)) + "\n")
    config = write_json({"samples_csv": "samples.csv", "lambda": {"kind": "constant", "level": 0.25}})
    code, out, _ = _run(["empirical", "--config", config], capsys)
    assert code == 0
    result = json.loads(out)
    assert result["quantile"] == 3.0
    assert result["n"] == 10
    assert result["index"] == 3


def test_empirical_empty_file(tmp_path, write_json, capsys):
    (tmp_path / "empty.csv").write_text("", encoding="utf-8")
    config = write_json({"samples_csv": "empty.csv", "lambda": {"kind": "constant", "level": 0.25}})
    code, _, err = _run(["empirical", "--config", config], capsys)
    assert code == 1
    assert "no samples" in err


def test_empirical_samples_with_invalid_utf8(tmp_path, write_json, capsys):
    (tmp_path / "samples.csv").write_bytes(b"loss\n1.0\n\xff2.0\n")
    config = write_json({"samples_csv": "samples.csv", "lambda": {"kind": "constant", "level": 0.25}})
    code, _, err = _run(["empirical", "--config", config], capsys)
    assert code == 1
    assert err.startswith("error: ")
    assert len(err.strip().splitlines()) == 1


def test_isolate(write_json, scenario_config, tmp_path, capsys):
    config = write_json(scenario_config("interval", "cells8"))
    out = tmp_path / "isolate.json"
    code, _, _ = _run(["isolate", "--config", config, "--out", out, "--trace"], capsys)
    assert code == 0
    result = json.loads(out.read_text(encoding="utf-8"))
    assert len(result["isolation"]["candidates"]) == 2
    assert result["solve"] is None
    boxes = (tmp_path / "isolate.boxes.csv").read_text(encoding="utf-8").splitlines()
    assert len(boxes) == 9


def test_isolate_subdivisions_override(write_json, scenario_config, capsys):
    config = write_json(scenario_config("interval", "cells8"))
    code, out, _ = _run(["isolate", "--config", config, "--subdivisions", "32"], capsys)
    assert code == 0
    assert json.loads(out)["isolation"]["evaluations"]["cdf"] == 33


def test_weights_must_sum_to_one(write_json, scenario_config, capsys):
    raw = scenario_config("two_asset", "penalty")
    raw["w_init"] = [0.2, 0.9]
    code, _, err = _run(["optimize", "--config", write_json(raw)], capsys)
    assert code == 1
    assert "w_init must sum to 1" in err


def test_penalty_weight_needs_penalty_method(write_json, scenario_config, capsys):
    config = write_json(scenario_config("two_asset", "penalty"))
    code, _, err = _run(["optimize", "--config", config, "--method", "kkt", "--penalty-t", "10"], capsys)
    assert code == 1
    assert "--penalty-t" in err


def test_undefined_gradient_is_a_portfolio_failure(write_json, undefined_gradient_config, capsys):
    config = write_json(undefined_gradient_config)
    code, _, err = _run(["optimize", "--config", config], capsys)
    assert code == 3
    assert err.startswith("error: gradient_undefined")


def test_reproduce_unknown_scenario(tmp_path, capsys):
    code, _, err = _run(["reproduce", "nope", "--out", tmp_path], capsys)
    assert code == 1
    assert err.startswith("error: ")


def test_reproduce_example(tmp_path, capsys):
    code, out, _ = _run(["reproduce", "example1", "--out", tmp_path], capsys)
    assert code == 0
    assert out.splitlines()[-1] == "PASS example1"
    assert all(line.startswith("PASS") for line in out.splitlines())
    for name in ("quantile.json", "quantile.trace.csv", "checks.json"):
        assert (tmp_path / "example1" / name).is_file()


def test_reproduce_is_deterministic(tmp_path, capsys):
    for run in ("first", "second"):
        assert _run(["reproduce", "interval", "--out", tmp_path / run], capsys)[0] == 0
    first = sorted((tmp_path / "first" / "interval").iterdir())
    second = sorted((tmp_path / "second" / "interval").iterdir())
    assert [p.name for p in first] == [p.name for p in second]
    for a, b in zip(first, second):
        assert a.read_bytes() == b.read_bytes()


def test_reproduce_rejects_zero_workers(tmp_path, capsys):
    code, _, err = _run(["reproduce", "example1", "--out", tmp_path, "--workers", "0"], capsys)
    assert code == 1
    assert err.startswith("error: ")


@pytest.mark.slow
def test_reproduce_all_in_parallel_keeps_summary_order(tmp_path, capsys):
    code, out, _ = _run(["reproduce", "all", "--out", tmp_path, "--workers", "4"], capsys)
    assert code == 0
    summary = [line for line in out.splitlines() if line.count(" ") == 1]
    assert summary == [f"PASS {name}" for name in SCENARIOS]
    assert out.splitlines()[-1] == f"PASS all ({len(SCENARIOS)} scenarios)"


def test_isolate_then_solve_agrees_with_quantile(write_json, scenario_config, capsys):
    config = write_json(scenario_config("example1", "quantile"))
    code, out, _ = _run(["quantile", "--config", config], capsys)
    assert code == 0
    direct = json.loads(out)["root"]

    code, out, _ = _run(["isolate", "--config", config], capsys)
    assert code == 0
    result = json.loads(out)
    assert len(result["isolation"]["candidates"]) == 1
    assert result["solve"]["root"] == pytest.approx(direct, abs=2e-7)
