import math
import re

import numpy as np
import pytest
from scipy import optimize as sciopt

from lambdaq.core.exceptions import BracketError, ValidationError
from lambdaq.services.lambda_functions import ConstantLambda
from lambdaq.services.distributions import LocationScaleT, NormalDist
from lambdaq.services.solver import (
    NO_DERIVATIVE,
    ExitReason,
    RootProblem,
    SolverParams,
    StepKind,
    expected_score,
    lambda_quantile,
    plain_newton,
    residual_fn,
    score,
    solve,
)

pytestmark = pytest.mark.unit


def _oracle_root(problem: RootProblem) -> float:
    return sciopt.brentq(problem.f, problem.x_min, problem.x_max, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def test_example_root_and_trace_shape(example_normal, example_lambda):
    report = lambda_quantile(example_normal, example_lambda)
    assert report.converged
    assert report.root == pytest.approx(-0.519755, abs=1e-5)
    assert report.lambda_var == -report.root
    assert report.steps <= 10
    assert re.fullmatch(r"B+N+", report.step_pattern)
    assert len(report.trace) == report.steps + 1
    assert report.trace[0].kind == StepKind.INITIAL


def test_trace_keeps_bracket_signs(example_normal, example_lambda):
    problem = residual_fn(example_normal, example_lambda)
    report = solve(problem)
    for step in report.trace:
        assert step.bracket_left < step.bracket_right
        assert problem.f(step.bracket_left) < 0.0
        assert problem.f(step.bracket_right) >= 0.0 or step is report.trace[-1]


def test_rejected_newton_is_recorded(example_normal, example_lambda):
    report = lambda_quantile(example_normal, example_lambda)
    bisections = [s for s in report.trace if s.kind == StepKind.BISECTION]
    assert bisections
    assert all(s.rejected_newton is None or math.isfinite(s.rejected_newton) for s in bisections)
    assert all(s.rejected_newton is None for s in report.trace if s.kind == StepKind.NEWTON)


def test_plain_newton_diverges(example_normal, example_lambda):
    problem = residual_fn(example_normal, example_lambda)
    report = plain_newton(problem, -0.878965)
    assert report.exit_reason == ExitReason.DIVERGED
    assert not report.converged
    assert report.trace[1].x < example_lambda.x_m
    assert abs(report.trace[2].x) > 1e100
    assert not math.isfinite(report.trace[-1].x)


def test_student_t_takes_newton_steps_only(student_t, student_t_lambda):
    report = lambda_quantile(student_t, student_t_lambda)
    assert report.converged
    assert re.fullmatch(r"N+", report.step_pattern)
    assert report.newton_steps <= 5
    assert abs(report.residual) < 1e-9

    tight = lambda_quantile(student_t, student_t_lambda, SolverParams(tol=1e-13))
    assert tight.root == pytest.approx(_oracle_root(residual_fn(student_t, student_t_lambda)), abs=1e-9)


def test_double_weibull_bisects_twice_then_newton(dweibull, dweibull_lambda):
    report = lambda_quantile(dweibull, dweibull_lambda)
    assert report.converged
    assert re.fullmatch(r"BBN+", report.step_pattern)
    tight = lambda_quantile(dweibull, dweibull_lambda, SolverParams(tol=1e-13))
    assert abs(report.root - tight.root) < 1e-10


def test_mixture_smooth_crossing(mixture, mixture_lambda_smooth):
    report = lambda_quantile(mixture, mixture_lambda_smooth)
    assert report.converged
    assert re.fullmatch(r"B+N+", report.step_pattern)
    assert report.steps <= 12


def test_mixture_jump_crossing_bisects_only(mixture, mixture_lambda_jump):
    params = SolverParams()
    problem = residual_fn(mixture, mixture_lambda_jump)
    report = solve(problem, params)
    assert report.converged
    assert report.newton_steps == 0
    expected = math.ceil(math.log2((problem.x_max - problem.x_min) / params.tol))
    assert abs(report.bisection_steps - expected) <= 2


@pytest.mark.parametrize("dist", [NormalDist(0.0, 1.0), LocationScaleT(4.0, 0.5, 2.0)])
@pytest.mark.parametrize("level", [0.01, 0.05, 0.5, 0.95])
def test_constant_lambda_gives_classical_quantile(dist, level):
    report = lambda_quantile(dist, ConstantLambda(level), SolverParams(tol=1e-12))
    assert report.converged
    assert report.root == pytest.approx(dist.ppf(level), abs=1e-8)


@pytest.mark.parametrize("name", ["example", "student_t", "dweibull"])
def test_newton_tail_is_quadratic(name, request):
    fixtures = {
        "example": ("example_normal", "example_lambda"),
        "student_t": ("student_t", "student_t_lambda"),
        "dweibull": ("dweibull", "dweibull_lambda"),
    }
    dist, lam = (request.getfixturevalue(f) for f in fixtures[name])
    report = lambda_quantile(dist, lam, SolverParams(tol=1e-13))
    root = report.root
    errors = [abs(s.x - root) for s in report.trace if s.kind == StepKind.NEWTON]
    for e_now, e_next in zip(errors, errors[1:]):
        if e_next > 1e-12:
            assert e_next <= 1e3 * e_now * e_now


def test_endpoint_root_is_returned_immediately():
    report = solve(RootProblem(lambda x: x, lambda x: 1.0, 0.0, 1.0))
    assert report.root == 0.0
    assert report.converged
    assert len(report.trace) == 1


def test_bracket_without_sign_change_is_rejected():
    with pytest.raises(BracketError):
        solve(RootProblem(lambda x: x - 5.0, lambda x: 1.0, 0.0, 1.0))


def test_missing_derivative_forces_bisection():
    report = solve(RootProblem(lambda x: x - 0.3, lambda x: NO_DERIVATIVE, 0.0, 1.0))
    assert report.converged
    assert report.newton_steps == 0
    assert report.root == pytest.approx(0.3, abs=1e-8)


def test_iteration_cap_is_reported(example_normal, example_lambda):
    report = lambda_quantile(example_normal, example_lambda, SolverParams(max_iter=1))
    assert not report.converged
    assert report.exit_reason == ExitReason.MAX_ITER
    assert len(report.trace) == 2


@pytest.mark.parametrize("kwargs,message", [
    ({"tol": -1.0}, "tol must be positive"),
    ({"delta": 0.5}, "delta must lie in (0, 0.5)"),
    ({"max_iter": 0}, "max_iter must be at least 1"),
])
def test_solver_params_validation(kwargs, message):
    with pytest.raises(ValidationError, match=re.escape(message)):
        SolverParams(**kwargs)


def test_bracket_must_be_ordered():
    with pytest.raises(ValidationError):
        RootProblem(lambda x: x, lambda x: 1.0, 1.0, 1.0)


def test_score_definition(example_lambda):
    assert score(example_lambda, 0.0, 0.0) == 0.0
    assert score(example_lambda, -0.2, 0.3) == pytest.approx(example_lambda.antideriv(-0.2, 0.3))
    assert score(example_lambda, 0.3, -0.2) == pytest.approx(0.5 - example_lambda.antideriv(-0.2, 0.3))


def test_expected_score_is_minimized_at_lambda_quantile(example_normal, example_lambda):
    rng = np.random.default_rng(20240917)
    samples = rng.normal(0.0, 1.0 / 3.0, size=100_000)
    root = lambda_quantile(example_normal, example_lambda).root
    grid = np.linspace(root - 0.2, root + 0.2, 401)
    values = [expected_score(example_lambda, x, samples) for x in grid]
    assert abs(grid[int(np.argmin(values))] - root) < 2e-2
