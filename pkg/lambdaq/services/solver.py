"""
Lambda-Newton-Bis: Newton steps safeguarded by a shrinking bracket.

A Newton proposal is kept only when it lands strictly inside the current
bracket with a margin of delta * |dx| on both sides; otherwise the step is a
bisection. f = F - Lambda is nondecreasing across its sign change, so the
bracket always keeps f(left) < 0 <= f(right).
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional

import numpy as np

from lambdaq.core.config import settings
from lambdaq.core.exceptions import BracketError, NoDensityError, ValidationError
from lambdaq.services.distributions import Distribution
from lambdaq.services.lambda_functions import LambdaFn

logger = logging.getLogger(__name__)

# returned by fprime where no density exists; any non-finite slope forces bisection
NO_DERIVATIVE = math.nan


class StepKind(str, Enum):
    INITIAL = "initial"
    NEWTON = "newton"
    BISECTION = "bisection"


class ExitReason(str, Enum):
    RESIDUAL_SMALL = "residual_small"
    BRACKET_SMALL = "bracket_small"
    MAX_ITER = "max_iter"
    DIVERGED = "diverged"


@dataclass(frozen=True)
class RootProblem:
    f: Callable[[float], float]
    fprime: Callable[[float], float]
    x_min: float
    x_max: float

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValidationError(
                "bracket must satisfy x_min < x_max",
                details={"x_min": self.x_min, "x_max": self.x_max}
            )


@dataclass(frozen=True)
class SolverParams:
    delta: float = 0.01
    max_iter: int = 100
    tol: float = 1e-8

    def __post_init__(self):
        if not 0.0 < self.delta < 0.5:
            raise ValidationError("delta must lie in (0, 0.5)", details={"delta": self.delta})
        if self.max_iter < 1:
            raise ValidationError("max_iter must be at least 1", details={"max_iter": self.max_iter})
        if not self.tol > 0:
            raise ValidationError("tol must be positive", details={"tol": self.tol})

    @classmethod
    def from_settings(cls) -> "SolverParams":
        return cls(delta=settings.SOLVER_DELTA, max_iter=settings.SOLVER_MAX_ITER, tol=settings.SOLVER_TOL)


@dataclass(frozen=True)
class TraceStep:
    """One evaluation of f: the iterate, its kind and the bracket after the update."""

    iteration: int
    x: float
    f: float
    kind: StepKind
    bracket_left: float
    bracket_right: float
    rejected_newton: Optional[float] = None


@dataclass
class SolveReport:
    root: float
    residual: float
    converged: bool
    exit_reason: ExitReason
    trace: List[TraceStep] = field(default_factory=list)
    newton_steps: int = 0
    bisection_steps: int = 0

    @property
    def steps(self) -> int:
        return self.newton_steps + self.bisection_steps

    @property
    def lambda_var(self) -> float:
        return -self.root

    @property
    def step_pattern(self) -> str:
        """Compact step sequence, e.g. "BBNNN"."""
        letters = {StepKind.NEWTON: "N", StepKind.BISECTION: "B"}
        return "".join(letters[s.kind] for s in self.trace if s.kind in letters)


def residual_fn(dist: Distribution, lam: LambdaFn) -> RootProblem:
    """f = F - Lambda with its bracket from the distribution at levels (lambda_m, lambda_M)."""

    def f(x: float) -> float:
        return dist.cdf(x) - lam.eval(x)

    def fprime(x: float) -> float:
        try:
            density = dist.pdf(x)
        except NoDensityError:
            return NO_DERIVATIVE
        return density - lam.rderiv(x)

    p_low, p_high = lam.bounds
    x_min, x_max = dist.bracket(p_low, p_high)
    if not x_min < x_max:
        # constant Lambda on a law with closed inverse: widened levels keep the bracket signs
        x_min, x_max = dist.bracket(0.5 * p_low, 0.5 * (1.0 + p_high))
    return RootProblem(f=f, fprime=fprime, x_min=x_min, x_max=x_max)


def solve(problem: RootProblem, params: Optional[SolverParams] = None) -> SolveReport:
    """
    Run Lambda-Newton-Bis on a bracketed problem.

    Args:
        problem: residual, its derivative and a bracket with f(x_min) <= 0 <= f(x_max)
        params: delta, max_iter and tol

    Returns:
        SolveReport; non-convergence is reported, not raised
    """
    params = params or SolverParams()
    f, fprime, tol, delta = problem.f, problem.fprime, params.tol, params.delta
    xl, xr = problem.x_min, problem.x_max

    fl = f(xl)
    if abs(fl) < tol:
        return _endpoint_report(xl, fl, xl, xr)
    fr = f(xr)
    if abs(fr) < tol:
        return _endpoint_report(xr, fr, xl, xr)
    if fl > 0 or fr < 0:
        raise BracketError(
            "bracket does not enclose a sign change of f",
            details={"x_min": xl, "x_max": xr, "f_min": fl, "f_max": fr}
        )

    x0 = 0.5 * (xl + xr)
    kind = StepKind.INITIAL
    rejected: Optional[float] = None
    trace: List[TraceStep] = []
    newton_steps = bisection_steps = 0

    for iteration in range(params.max_iter):
        f0 = f(x0)
        if abs(f0) < tol:
            trace.append(TraceStep(iteration, x0, f0, kind, xl, xr, rejected))
            return _report(x0, f0, ExitReason.RESIDUAL_SMALL, trace, newton_steps, bisection_steps)

        if f0 < 0:
            xl = x0
        else:
            xr = x0
        trace.append(TraceStep(iteration, x0, f0, kind, xl, xr, rejected))
        if xr - xl < tol:
            return _report(x0, f0, ExitReason.BRACKET_SMALL, trace, newton_steps, bisection_steps)

        df0 = fprime(x0)
        if math.isfinite(df0) and df0 != 0.0:
            dx = -f0 / df0
        else:
            dx = -math.copysign(math.inf, f0)

        proposal = x0 + dx
        if proposal >= xr - delta * abs(dx) or proposal <= xl + delta * abs(dx):
            rejected = proposal if math.isfinite(proposal) else None
            x0 = 0.5 * (xl + xr)
            kind = StepKind.BISECTION
            bisection_steps += 1
        else:
            rejected = None
            x0 = proposal
            kind = StepKind.NEWTON
            newton_steps += 1
        logger.debug(f"step {iteration + 1}: {kind.value} to x={x0!r}, bracket=[{xl!r}, {xr!r}]")

    f0 = f(x0)
    trace.append(TraceStep(params.max_iter, x0, f0, kind, xl, xr, rejected))
    logger.warning(f"Lambda-Newton-Bis stopped after {params.max_iter} iterations, |f|={abs(f0):.3g}")
    return _report(x0, f0, ExitReason.MAX_ITER, trace, newton_steps, bisection_steps)


def _endpoint_report(x: float, fx: float, xl: float, xr: float) -> SolveReport:
    trace = [TraceStep(0, x, fx, StepKind.INITIAL, xl, xr)]
    return _report(x, fx, ExitReason.RESIDUAL_SMALL, trace, 0, 0)


def _report(
    root: float,
    residual: float,
    reason: ExitReason,
    trace: List[TraceStep],
    newton_steps: int,
    bisection_steps: int,
) -> SolveReport:
    return SolveReport(
        root=root,
        residual=residual,
        converged=reason in (ExitReason.RESIDUAL_SMALL, ExitReason.BRACKET_SMALL),
        exit_reason=reason,
        trace=trace,
        newton_steps=newton_steps,
        bisection_steps=bisection_steps,
    )


def lambda_quantile(dist: Distribution, lam: LambdaFn, params: Optional[SolverParams] = None) -> SolveReport:
    report = solve(residual_fn(dist, lam), params)
    logger.debug(
        f"lambda quantile of {dist.name}: root={report.root!r}, "
        f"{report.newton_steps} newton / {report.bisection_steps} bisection steps"
    )
    return report


def plain_newton(problem: RootProblem, x0: float, max_iter: int = 50, tol: float = 1e-8) -> SolveReport:
    """Undamped Newton from x0; kept to show how it fails without a bracket."""
    trace: List[TraceStep] = []
    x = x0
    kind = StepKind.INITIAL
    steps = 0
    for iteration in range(max_iter + 1):
        if not math.isfinite(x):
            trace.append(TraceStep(iteration, x, math.nan, kind, problem.x_min, problem.x_max))
            logger.info(f"plain Newton diverged after {steps} steps")
            return SolveReport(x, math.nan, False, ExitReason.DIVERGED, trace, steps, 0)

        fx = problem.f(x)
        trace.append(TraceStep(iteration, x, fx, kind, problem.x_min, problem.x_max))
        if abs(fx) < tol:
            return SolveReport(x, fx, True, ExitReason.RESIDUAL_SMALL, trace, steps, 0)
        if iteration == max_iter:
            break

        slope = problem.fprime(x)
        if math.isfinite(slope) and slope != 0.0:
            x = x - fx / slope
        else:
            x = -math.copysign(math.inf, fx)
        kind = StepKind.NEWTON
        steps += 1

    return SolveReport(x, trace[-1].f, False, ExitReason.MAX_ITER, trace, steps, 0)


def score(lam: LambdaFn, x: float, y: float) -> float:
    """S(x, y) = (y - x)^- - integral_y^x Lambda."""
    return max(x - y, 0.0) - lam.antideriv(y, x)


def expected_score(lam: LambdaFn, x: float, samples: np.ndarray) -> float:
    """Mean of score(lam, x, y) over samples, vectorized over y."""
    ys = np.asarray(samples, dtype=float)
    shortfall = np.maximum(x - ys, 0.0)
    integral = float(lam.primitive_array(np.asarray(x))) - lam.primitive_array(ys)
    return float(np.mean(shortfall - integral))
