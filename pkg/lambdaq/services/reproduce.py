"""
Bundled reproduction scenarios.

Each scenario is a JSON fixture listing named runs (one of the four
computations with its config) and acceptance checks on their results.
Running a scenario writes one JSON result per run, plus trace, box or
history CSVs, into its own output directory.
"""
import concurrent.futures
import json
import logging
import math
import re
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from pydantic import ValidationError as PydanticValidationError

from lambdaq.core.exceptions import ScenarioNotFound, ValidationError
from lambdaq.schemas.reports import ScenarioCheckResult, ScenarioOutcome
from lambdaq.schemas.requests import EmpiricalConfig, IsolateConfig, OptimizeConfig, QuantileConfig
from lambdaq.schemas.scenario import Scenario, ScenarioCheck, ScenarioRun
from lambdaq.services.runner import LambdaQService
from lambdaq.services.serialization import (
    dump_json,
    to_payload,
    write_boxes_csv,
    write_history_csv,
    write_trace_csv,
)

logger = logging.getLogger(__name__)

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "fixtures" / "scenarios"
SCENARIOS = (
    "disc1",
    "disc2",
    "dweibull",
    "example1",
    "interval",
    "student_t",
    "three_asset_normal",
    "three_asset_t",
    "two_asset",
)

_MISSING = object()


def load_scenario(name: str, scenario_dir: Optional[Path] = None) -> Scenario:
    path = (scenario_dir or SCENARIO_DIR) / f"{name}.json"
    if (scenario_dir is None and name not in SCENARIOS) or not path.is_file():
        raise ScenarioNotFound("Scenario", name)
    try:
        return Scenario.model_validate(json.loads(path.read_text(encoding="utf-8")))
    except (json.JSONDecodeError, PydanticValidationError) as e:
        raise ValidationError(f"scenario {name} is malformed: {e}", details={"path": str(path)})


def lookup(payload: Any, path: str) -> Any:
    """Follow a dotted path through dicts and lists; missing keys give a sentinel."""
    current = payload
    for part in path.split("."):
        if isinstance(current, dict) and part in current:
            current = current[part]
        elif isinstance(current, list) and part.isdigit() and int(part) < len(current):
            current = current[int(part)]
        else:
            return _MISSING
    return current


def evaluate_check(check: ScenarioCheck, payload: Dict[str, Any]) -> ScenarioCheckResult:
    actual = lookup(payload, check.path)
    passed = False
    if actual is not _MISSING and actual is not None:
        try:
            if check.op == "approx":
                passed = math.isfinite(actual) and abs(actual - check.value) <= check.tol
            elif check.op == "le":
                passed = actual <= check.value
            elif check.op == "ge":
                passed = actual >= check.value
            elif check.op == "eq":
                passed = actual == check.value
            elif check.op == "matches":
                passed = re.search(check.value, actual) is not None
            elif check.op == "count":
                actual = len(actual)
                passed = actual == check.value
        except TypeError:
            passed = False
    return ScenarioCheckResult(
        run=check.run,
        path=check.path,
        op=check.op,
        expected=check.value,
        actual=None if actual is _MISSING else actual,
        passed=passed,
    )


def _execute(run: ScenarioRun, service: LambdaQService, out_dir: Path) -> Dict[str, Any]:
    def artifact(suffix: str) -> Path:
        return out_dir / f"{run.name}{suffix}"

    if run.command == "quantile":
        result, report = service.quantile(QuantileConfig.model_validate(run.config))
        write_trace_csv(artifact(".trace.csv"), report)
    elif run.command == "empirical":
        result = service.empirical(EmpiricalConfig.model_validate(run.config))
    elif run.command == "isolate":
        result, isolation, solved = service.isolate(IsolateConfig.model_validate(run.config))
        write_boxes_csv(artifact(".boxes.csv"), isolation.boxes)
        if solved is not None:
            write_trace_csv(artifact(".trace.csv"), solved)
    else:
        result, report = service.optimize(OptimizeConfig.model_validate(run.config))
        write_history_csv(artifact(".history.csv"), report.history, len(report.weights))

    artifact(".json").write_text(dump_json(result), encoding="utf-8")
    return to_payload(result)


def run_scenario(
    name: str,
    out_dir: Union[str, Path],
    service: Optional[LambdaQService] = None,
    scenario_dir: Optional[Path] = None,
) -> ScenarioOutcome:
    """
    Run every run of a scenario and evaluate its checks.

    Args:
        name: scenario name
        out_dir: parent directory; artifacts go to out_dir/<name>/
        service: service to run with, resolving sample paths against the fixture directory by default
        scenario_dir: directory holding the scenario fixtures

    Returns:
        ScenarioOutcome with one result per check
    """
    scenario = load_scenario(name, scenario_dir)
    service = service or LambdaQService(base_dir=scenario_dir or SCENARIO_DIR)
    target = Path(out_dir) / scenario.name
    target.mkdir(parents=True, exist_ok=True)

    payloads = {}
    for run in scenario.runs:
        logger.info(f"scenario {scenario.name}: running {run.name} ({run.command})")
        try:
            payloads[run.name] = _execute(run, service, target)
        except PydanticValidationError as e:
            raise ValidationError(
                f"scenario {scenario.name} run {run.name} has an invalid config: {e}",
                details={"scenario": scenario.name, "run": run.name},
            )

    results: List[ScenarioCheckResult] = [evaluate_check(c, payloads[c.run]) for c in scenario.checks]
    outcome = ScenarioOutcome(name=scenario.name, passed=all(r.passed for r in results), checks=results)
    (target / "checks.json").write_text(dump_json(outcome), encoding="utf-8")
    if not outcome.passed:
        failed = sum(not r.passed for r in results)
        logger.warning(f"scenario {scenario.name}: {failed} of {len(results)} checks failed")
    return outcome


def run_many(
    names: Sequence[str],
    out_dir: Union[str, Path],
    service: Optional[LambdaQService] = None,
    workers: int = 1,
) -> List[ScenarioOutcome]:
    """
    Run several scenarios, in worker processes when workers > 1.

    Every scenario writes to its own directory; outcomes come back in the
    order of names whatever order the workers finish in.
    """
    if workers < 1:
        raise ValidationError("workers must be at least 1", details={"workers": workers})
    if workers == 1 or len(names) < 2:
        return [run_scenario(name, out_dir, service) for name in names]

    for name in names:
        load_scenario(name)
    outcomes: Dict[str, ScenarioOutcome] = {}
    logger.info(f"running {len(names)} scenarios on {min(workers, len(names))} workers")
    with concurrent.futures.ProcessPoolExecutor(max_workers=min(workers, len(names))) as executor:
        futures = {executor.submit(run_scenario, name, out_dir): name for name in names}
        for future in concurrent.futures.as_completed(futures):
            outcomes[futures[future]] = future.result()
    return [outcomes[name] for name in names]

