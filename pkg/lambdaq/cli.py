"""
Command line entry point.

    lambdaq <subcommand> --config <path> [--out <path>] [--trace] [overrides]
    lambdaq reproduce <scenario|all> [--out <dir>]

JSON results go to --out or standard output, logs to standard error.
Exit codes: 0 success, 1 input error, 2 non-convergence or failed checks,
3 portfolio failures.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError as PydanticValidationError

from lambdaq.core.config import settings
from lambdaq.core.exceptions import LambdaQException, ValidationError
from lambdaq.schemas.requests import EmpiricalConfig, IsolateConfig, OptimizeConfig, QuantileConfig
from lambdaq.services.reproduce import SCENARIOS, run_many
from lambdaq.services.runner import LambdaQService
from lambdaq.services.serialization import (
    dump_json,
    write_boxes_csv,
    write_history_csv,
    write_trace_csv,
)

logger = logging.getLogger("lambdaq")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_CONVERGED = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lambdaq", description="Lambda quantiles and lambda-quantile portfolios")
    subparsers = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("quantile", "lambda quantile of a parametric law by Lambda-Newton-Bis"),
        ("empirical", "empirical lambda quantile of a CSV sample"),
        ("isolate", "interval isolation of the smallest crossing"),
        ("optimize", "minimize portfolio lambda VaR"),
    ):
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--config", required=True, help="JSON config file")
        sub.add_argument("--out", help="JSON result path (default: standard output)")
        sub.add_argument("--trace", action="store_true", help="also write the CSV trace")
        if name == "empirical":
            continue
        sub.add_argument("--eps", type=float, help="solver residual tolerance")
        sub.add_argument("--delta", type=float, help="bisection guard fraction")
        sub.add_argument("--max-iter", type=int, help="solver iteration cap")
        if name == "optimize":
            sub.add_argument("--tol", type=float, help="descent tolerance on the projected gradient")
            sub.add_argument("--method", choices=("penalty", "kkt"), help="constraint handling")
            sub.add_argument("--penalty-t", type=float, help="penalty weight t")
        else:
            sub.add_argument("--tol", type=float, help="alias of --eps")
        if name == "isolate":
            sub.add_argument("--subdivisions", type=int, help="number of uniform cells")

    reproduce = subparsers.add_parser("reproduce", help="run bundled reproduction scenarios")
    reproduce.add_argument("scenario", help=f"one of {', '.join(SCENARIOS)} or 'all'")
    reproduce.add_argument("--out", help=f"output directory (default: {settings.LAMBDAQ_OUTPUT_DIR})")
    reproduce.add_argument(
        "--workers", type=int, help=f"scenarios run in parallel processes (default: {settings.REPRODUCE_WORKERS})"
    )
    return parser


def _read_config(path: str) -> Dict[str, Any]:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise ValidationError(f"cannot read config {path}: {e.strerror}", details={"path": path})
    except json.JSONDecodeError as e:
        raise ValidationError(f"malformed JSON in {path}: {e.msg} at line {e.lineno}", details={"path": path})
    except UnicodeDecodeError:
        raise ValidationError(f"config {path} is not valid UTF-8", details={"path": path})
    if not isinstance(raw, dict):
        raise ValidationError(f"config {path} must be a JSON object", details={"path": path})
    return raw


def apply_overrides(raw: Dict[str, Any], args: argparse.Namespace) -> Dict[str, Any]:
    """Fold command line overrides into the raw config before validation."""
    raw = dict(raw)
    solver = dict(raw.get("solver") or {})
    if args.command == "optimize" and "tol" not in solver:
        solver["tol"] = 1e-12
    eps = getattr(args, "eps", None)
    if args.command != "optimize" and eps is None:
        eps = getattr(args, "tol", None)
    overrides = {"tol": eps, "delta": getattr(args, "delta", None), "max_iter": getattr(args, "max_iter", None)}
    for key, value in overrides.items():
        if value is not None:
            solver[key] = value
    if solver and args.command != "empirical":
        raw["solver"] = solver

    if args.command == "optimize":
        if args.tol is not None:
            raw["tol"] = args.tol
        if args.method is not None or args.penalty_t is not None:
            method = dict(raw.get("method") or {"name": "penalty"})
            if args.method is not None and args.method != method.get("name"):
                method = {"name": args.method}
            if args.penalty_t is not None:
                if method["name"] != "penalty":
                    raise ValidationError("--penalty-t only applies to the penalty method")
                method["t"] = args.penalty_t
            raw["method"] = method
    if args.command == "isolate" and args.subdivisions is not None:
        raw["subdivisions"] = args.subdivisions
    return raw


def _validation_message(e: PydanticValidationError) -> str:
    first = e.errors()[0]
    where = ".".join(str(p) for p in first.get("loc", ())) or "config"
    message = first.get("msg", "invalid value").replace("Value error, ", "", 1)
    extra = f" (+{e.error_count() - 1} more)" if e.error_count() > 1 else ""
    return f"{where}: {message}{extra}"


def _artifact_path(args: argparse.Namespace, suffix: str) -> Path:
    if args.out:
        out = Path(args.out)
        return out.with_name(f"{out.stem}{suffix}")
    return Path(settings.LAMBDAQ_OUTPUT_DIR) / f"{args.command}{suffix}"


def _emit(args: argparse.Namespace, result) -> None:
    text = dump_json(result)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def run_quantile(args: argparse.Namespace, service: LambdaQService, raw: Dict[str, Any]) -> int:
    result, report = service.quantile(QuantileConfig.model_validate(raw))
    _emit(args, result)
    if args.trace:
        write_trace_csv(_artifact_path(args, ".trace.csv"), report)
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def run_empirical(args: argparse.Namespace, service: LambdaQService, raw: Dict[str, Any]) -> int:
    result = service.empirical(EmpiricalConfig.model_validate(raw))
    _emit(args, result)
    return EXIT_OK


def run_isolate(args: argparse.Namespace, service: LambdaQService, raw: Dict[str, Any]) -> int:
    config = IsolateConfig.model_validate(raw)
    result, report, solved = service.isolate(config)
    _emit(args, result)
    if args.trace:
        write_boxes_csv(_artifact_path(args, ".boxes.csv"), report.boxes)
        if solved is not None:
            write_trace_csv(_artifact_path(args, ".trace.csv"), solved)
    if config.solve and (solved is None or not solved.converged):
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def run_optimize(args: argparse.Namespace, service: LambdaQService, raw: Dict[str, Any]) -> int:
    result, report = service.optimize(OptimizeConfig.model_validate(raw))
    _emit(args, result)
    if args.trace:
        write_history_csv(_artifact_path(args, ".history.csv"), report.history, len(report.weights))
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def run_reproduce(args: argparse.Namespace) -> int:
    names = list(SCENARIOS) if args.scenario == "all" else [args.scenario]
    out_dir = Path(args.out or settings.LAMBDAQ_OUTPUT_DIR)
    workers = settings.REPRODUCE_WORKERS if args.workers is None else args.workers
    all_passed = True
    for name, outcome in zip(names, run_many(names, out_dir, workers=workers)):
        for check in outcome.checks:
            status = "PASS" if check.passed else "FAIL"
            print(f"{status} {name} {check.run}.{check.path} {check.op} {check.expected!r} (got {check.actual!r})")
        print(f"{'PASS' if outcome.passed else 'FAIL'} {name}")
        all_passed = all_passed and outcome.passed
    if len(names) > 1:
        print(f"{'PASS' if all_passed else 'FAIL'} all ({len(names)} scenarios)")
    return EXIT_OK if all_passed else EXIT_NOT_CONVERGED


COMMANDS = {
    "quantile": run_quantile,
    "empirical": run_empirical,
    "isolate": run_isolate,
    "optimize": run_optimize,
}


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL.upper()),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        if args.command == "reproduce":
            return run_reproduce(args)
        config_path = Path(args.config)
        raw = apply_overrides(_read_config(args.config), args)
        service = LambdaQService(base_dir=config_path.resolve().parent)
        return COMMANDS[args.command](args, service, raw)
    except PydanticValidationError as e:
        logger.debug(f"config validation failed: {e}")
        print(f"error: {_validation_message(e)}", file=sys.stderr)
        return EXIT_INPUT
    except LambdaQException as e:
        logger.debug(f"{e.code} details: {e.details}")
        print(f"error: {e.code}: {e.message}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
