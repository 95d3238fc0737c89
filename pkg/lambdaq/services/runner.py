"""
Lambda quantile service.

Turns validated configs into domain objects, runs the computation and packs
the result models shared by the command line, the HTTP routes and the
reproduction scenarios.
"""
import logging
import math
from pathlib import Path
from typing import Optional, Tuple

from lambdaq.core.exceptions import ValidationError
from lambdaq.schemas.descriptors import EmpiricalDescriptor
from lambdaq.schemas.reports import (
    BoxOut,
    EmpiricalResult,
    IsolateResult,
    IsolationOut,
    OptimizeResult,
    QuantileResult,
)
from lambdaq.schemas.requests import (
    EmpiricalConfig,
    EmpiricalRequest,
    IsolateConfig,
    OptimizeConfig,
    QuantileConfig,
)
from lambdaq.services.distributions import Distribution
from lambdaq.services.empirical import SampleSet, empirical_lambda_quantile_report, read_samples_csv
from lambdaq.services.factory import (
    build_distribution,
    build_lambda,
    build_problem,
    build_solver_params,
    resolve_path,
)
from lambdaq.services.isolation import (
    IsolationReport,
    RootBox,
    isolate,
    refine_isolation,
    solve_selected,
)
from lambdaq.services.portfolio import OptimReport, optimize
from lambdaq.services.solver import SolveReport, lambda_quantile, residual_fn

logger = logging.getLogger(__name__)


def quantile_result(report: SolveReport) -> QuantileResult:
    return QuantileResult(
        root=report.root,
        lambda_var=report.lambda_var,
        residual=report.residual if math.isfinite(report.residual) else None,
        converged=report.converged,
        exit_reason=report.exit_reason.value,
        newton_steps=report.newton_steps,
        bisection_steps=report.bisection_steps,
        trace_length=len(report.trace),
        step_pattern=report.step_pattern,
    )


def _box_out(box: RootBox) -> BoxOut:
    return BoxOut(
        lo=box.lo,
        hi=box.hi,
        range_lo=box.range_lo,
        range_hi=box.range_hi,
        contains_root=box.contains_root,
        possible_root=box.possible_root,
    )


def isolation_out(report: IsolationReport) -> IsolationOut:
    selected = report.selected_box
    return IsolationOut(
        subdivisions=report.subdivisions,
        root_detected=report.root_detected,
        selected=report.selected,
        selected_box=None if selected is None else _box_out(selected),
        leading_range=None if report.leading_range is None else list(report.leading_range),
        candidates=[_box_out(b) for b in report.candidates],
        boxes=[_box_out(b) for b in report.boxes],
        evaluations=report.evaluations,
    )


def optimize_result(report: OptimReport) -> OptimizeResult:
    return OptimizeResult(
        method=report.method.value,
        weights=[float(x) for x in report.weights],
        expected_return=report.expected_return,
        rho=report.rho,
        lambda_var=report.lambda_var,
        converged=report.converged,
        grad_norm=report.grad_norm,
        descent_steps=report.descent_steps,
        rho_calls=report.rho_calls,
        rho_calls_relative=report.relative_calls,
        solver_steps=report.solver_steps,
        solver_steps_relative=report.relative_steps,
        multipliers_w=None if report.multipliers_w is None else [float(x) for x in report.multipliers_w],
        multiplier_r=report.multiplier_r,
    )


class LambdaQService:
    """Service running lambda quantile computations from validated configs."""

    def __init__(self, base_dir: Optional[Path] = None, allow_files: bool = True):
        """
        Initialize the service.

        Args:
            base_dir: directory that relative sample paths are resolved against
            allow_files: whether configs may reference sample CSV files
        """
        self.base_dir = base_dir
        self.allow_files = allow_files

    def _distribution(self, descriptor) -> Distribution:
        if isinstance(descriptor, EmpiricalDescriptor) and descriptor.samples_csv is not None:
            self._check_files(descriptor.samples_csv)
        return build_distribution(descriptor, self.base_dir)

    def _check_files(self, path: str) -> None:
        if not self.allow_files:
            raise ValidationError("sample files are not accepted here; pass samples inline", details={"path": path})

    def quantile(self, config: QuantileConfig) -> Tuple[QuantileResult, SolveReport]:
        dist = self._distribution(config.distribution)
        lam = build_lambda(config.lambda_fn)
        report = lambda_quantile(dist, lam, build_solver_params(config.solver))
        logger.info(
            f"quantile of {dist.name}: root={report.root:.9g}, exit={report.exit_reason.value}, "
            f"steps={report.newton_steps}N/{report.bisection_steps}B"
        )
        return quantile_result(report), report

    def empirical(self, config: EmpiricalConfig) -> EmpiricalResult:
        self._check_files(config.samples_csv)
        samples = read_samples_csv(resolve_path(config.samples_csv, self.base_dir))
        return self._empirical(samples, config.lambda_fn)

    def empirical_inline(self, request: EmpiricalRequest) -> EmpiricalResult:
        return self._empirical(SampleSet.from_iterable(request.samples), request.lambda_fn)

    def _empirical(self, samples: SampleSet, lambda_descriptor) -> EmpiricalResult:
        outcome = empirical_lambda_quantile_report(samples, build_lambda(lambda_descriptor))
        logger.info(f"empirical lambda quantile over n={outcome.n}: {outcome.quantile:.9g}")
        return EmpiricalResult(
            quantile=outcome.quantile,
            lambda_var=outcome.lambda_var,
            n=outcome.n,
            index=outcome.index,
            warning=outcome.warning,
        )

    def isolate(self, config: IsolateConfig) -> Tuple[IsolateResult, IsolationReport, Optional[SolveReport]]:
        dist = self._distribution(config.distribution)
        lam = build_lambda(config.lambda_fn)
        problem = residual_fn(dist, lam)
        lo = problem.x_min if config.lo is None else config.lo
        hi = problem.x_max if config.hi is None else config.hi

        if config.refine_tolerance is not None:
            report = refine_isolation(
                dist, lam, lo, hi, config.refine_tolerance, config.subdivisions, config.max_subdivisions
            )
        else:
            report = isolate(dist, lam, lo, hi, config.subdivisions)

        solved = None
        if config.solve and report.root_detected:
            solved = solve_selected(problem, report, build_solver_params(config.solver))
        logger.info(
            f"isolation on [{lo:.6g}, {hi:.6g}] with {report.subdivisions} cells: "
            f"{len(report.candidates)} candidate boxes, selected={report.selected}"
        )
        result = IsolateResult(
            isolation=isolation_out(report),
            solve=None if solved is None else quantile_result(solved),
        )
        return result, report, solved

    def optimize(self, config: OptimizeConfig) -> Tuple[OptimizeResult, OptimReport]:
        report = optimize(build_problem(config))
        return optimize_result(report), report
