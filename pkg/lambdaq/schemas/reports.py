from typing import Any, Dict, List, Optional

from pydantic import BaseModel


# Response model for one Lambda-Newton-Bis run
class QuantileResult(BaseModel):
    root: float
    lambda_var: float
    residual: Optional[float] = None
    converged: bool
    exit_reason: str
    newton_steps: int
    bisection_steps: int
    trace_length: int
    step_pattern: str


class EmpiricalResult(BaseModel):
    quantile: float
    lambda_var: float
    n: int
    index: int
    warning: Optional[str] = None


class BoxOut(BaseModel):
    lo: float
    hi: float
    range_lo: float
    range_hi: float
    contains_root: bool
    possible_root: bool


class IsolationOut(BaseModel):
    subdivisions: int
    root_detected: bool
    selected: Optional[int] = None
    selected_box: Optional[BoxOut] = None
    leading_range: Optional[List[float]] = None
    candidates: List[BoxOut] = []
    boxes: List[BoxOut] = []
    evaluations: Dict[str, int] = {}


class IsolateResult(BaseModel):
    isolation: IsolationOut
    solve: Optional[QuantileResult] = None


class OptimizeResult(BaseModel):
    method: str
    weights: List[float]
    expected_return: float
    rho: float
    lambda_var: float
    converged: bool
    grad_norm: float
    descent_steps: int
    rho_calls: int
    rho_calls_relative: float
    solver_steps: int
    solver_steps_relative: float
    multipliers_w: Optional[List[float]] = None
    multiplier_r: Optional[float] = None


class ScenarioCheckResult(BaseModel):
    run: str
    path: str
    op: str
    expected: Optional[Any] = None
    actual: Optional[Any] = None
    passed: bool


class ScenarioOutcome(BaseModel):
    name: str
    passed: bool
    checks: List[ScenarioCheckResult] = []
