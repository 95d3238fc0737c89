"""
Lambda-VaR portfolio allocation over elliptical markets.

For weights w the portfolio w'X follows the market family with location
w'mu and scale sqrt(w'Sigma w), so rho(w) is a univariate lambda quantile.
Weights are driven by Armijo projected gradient descent on the affine set
sum(w) = 1, either on a quadratic penalty objective or on the Lagrangian with
projected multiplier updates.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from lambdaq.core.config import settings
from lambdaq.core.exceptions import (
    BracketError,
    DegeneratePortfolioError,
    GradientUndefinedError,
    StalledLineSearchError,
    ValidationError,
)
from lambdaq.services.distributions import Distribution, LocationScaleT, NormalDist
from lambdaq.services.lambda_functions import LambdaFn
from lambdaq.services.solver import RootProblem, SolveReport, SolverParams, residual_fn, solve

logger = logging.getLogger(__name__)


class MarketFamily(str, Enum):
    NORMAL = "multivariate_normal"
    T = "multivariate_t"


class Method(str, Enum):
    PENALTY = "penalty"
    KKT = "kkt"


class ArmijoRule(str, Enum):
    STANDARD = "standard"
    RELAXED = "relaxed"


class MultiplierRule(str, Enum):
    ASCENT = "ascent"
    DESCENT = "descent"


@dataclass(frozen=True, eq=False)
class MarketModel:
    family: MarketFamily
    mean: np.ndarray
    cov: np.ndarray
    nu: Optional[float] = None

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).ravel()
        cov = np.asarray(self.cov, dtype=float)
        d = mean.size
        if d < 2:
            raise ValidationError("a market needs at least two assets", details={"assets": d})
        if cov.shape != (d, d):
            raise ValidationError(
                "covariance shape does not match the mean vector",
                details={"mean": d, "cov": list(cov.shape)}
            )
        if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12):
            raise ValidationError("covariance must be symmetric")
        if np.any(np.diag(cov) < 0):
            raise ValidationError("covariance diagonal must be nonnegative")
        family = MarketFamily(self.family)
        if family == MarketFamily.T and not (self.nu is not None and self.nu > 0):
            raise ValidationError("multivariate t markets need nu > 0", details={"nu": self.nu})
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @classmethod
    def from_vol_corr(
        cls,
        family: MarketFamily,
        mean: Sequence[float],
        sigma: Sequence[float],
        corr: Sequence[Sequence[float]],
        nu: Optional[float] = None,
    ) -> "MarketModel":
        """Sigma = (sigma sigma') * corr, elementwise."""
        vol = np.asarray(sigma, dtype=float)
        rho = np.asarray(corr, dtype=float)
        if rho.shape != (vol.size, vol.size):
            raise ValidationError("correlation shape does not match the volatility vector")
        return cls(family, np.asarray(mean, dtype=float), np.outer(vol, vol) * rho, nu)

    @property
    def dim(self) -> int:
        return int(self.mean.size)


@dataclass(frozen=True)
class DescentParams:
    eta0: float = 2.0
    c1: float = 0.1
    tol: float = 1e-3
    max_halvings: int = 40
    max_steps: int = 10000
    armijo_rule: ArmijoRule = ArmijoRule.STANDARD
    multiplier_rule: MultiplierRule = MultiplierRule.ASCENT
    multiplier_step: float = 0.1
    return_multiplier_step: float = 2.0
    warm_half_width: float = 1e-3

    def __post_init__(self):
        if not self.eta0 > 0:
            raise ValidationError("eta0 must be positive", details={"eta0": self.eta0})
        if not 0 < self.c1 < 1:
            raise ValidationError("c1 must lie in (0, 1)", details={"c1": self.c1})
        if not self.tol > 0:
            raise ValidationError("tol must be positive", details={"tol": self.tol})
        if self.max_halvings < 0 or self.max_steps < 0:
            raise ValidationError("iteration limits must be nonnegative")
        if not (self.multiplier_step > 0 and self.return_multiplier_step > 0):
            raise ValidationError(
                "multiplier steps must be positive",
                details={"weights": self.multiplier_step, "return": self.return_multiplier_step}
            )

    @classmethod
    def from_settings(cls, **overrides) -> "DescentParams":
        values = dict(
            eta0=settings.ARMIJO_ETA0,
            c1=settings.ARMIJO_C1,
            tol=settings.DESCENT_TOL,
            max_halvings=settings.ARMIJO_MAX_HALVINGS,
            max_steps=settings.DESCENT_MAX_STEPS,
            multiplier_step=settings.MULTIPLIER_STEP,
            return_multiplier_step=settings.RETURN_MULTIPLIER_STEP,
            warm_half_width=settings.WARM_START_MIN_HALF_WIDTH,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True, eq=False)
class AllocationProblem:
    market: MarketModel
    lam: LambdaFn
    r_min: float
    w_init: np.ndarray
    method: Method = Method.PENALTY
    penalty_t: float = 100.0
    solver_params: SolverParams = field(default_factory=lambda: SolverParams(tol=1e-12))
    descent: DescentParams = field(default_factory=DescentParams)

    def __post_init__(self):
        w = np.asarray(self.w_init, dtype=float).ravel()
        if w.size != self.market.dim:
            raise ValidationError(
                "w_init length does not match the number of assets",
                details={"w_init": w.size, "assets": self.market.dim}
            )
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValidationError("w_init must sum to 1", details={"sum": float(w.sum())})
        if not self.r_min > 0:
            raise ValidationError("r_min must be positive", details={"r_min": self.r_min})
        if not self.penalty_t > 0:
            raise ValidationError("penalty t must be positive", details={"t": self.penalty_t})
        object.__setattr__(self, "w_init", w)
        object.__setattr__(self, "method", Method(self.method))


class RhoEvaluation(NamedTuple):
    rho: float
    grad: np.ndarray
    report: SolveReport


@dataclass(frozen=True)
class DescentStep:
    step: int
    weights: Tuple[float, ...]
    rho: float
    objective: float
    grad_norm: float
    halvings: int


@dataclass
class OptimReport:
    method: Method
    weights: np.ndarray
    expected_return: float
    rho: float
    converged: bool
    grad_norm: float
    descent_steps: int
    rho_calls: int
    solver_steps: int
    multipliers_w: Optional[np.ndarray] = None
    multiplier_r: Optional[float] = None
    history: List[DescentStep] = field(default_factory=list)

    @property
    def lambda_var(self) -> float:
        return -self.rho

    @property
    def relative_calls(self) -> float:
        return self.rho_calls / (self.descent_steps + 1)

    @property
    def relative_steps(self) -> float:
        return self.solver_steps / self.rho_calls if self.rho_calls else 0.0


def portfolio_law(market: MarketModel, w: np.ndarray) -> Distribution:
    w = np.asarray(w, dtype=float)
    mu_w = float(w @ market.mean)
    var_w = float(w @ market.cov @ w)
    if not var_w > 0:
        raise DegeneratePortfolioError(
            "portfolio variance vanishes", details={"weights": w.tolist(), "variance": var_w}
        )
    sigma_w = math.sqrt(var_w)
    if market.family == MarketFamily.T:
        return LocationScaleT(market.nu, mu_w, sigma_w)
    return NormalDist(mu_w, sigma_w)


def portfolio_rho(
    market: MarketModel,
    lam: LambdaFn,
    w: np.ndarray,
    solver_params: Optional[SolverParams] = None,
    warm_start: Optional[float] = None,
    warm_half_width: float = 1e-3,
) -> Tuple[float, SolveReport, Distribution]:
    """rho(w); a warm start first tries a narrow bracket around the previous rho."""
    law = portfolio_law(market, w)
    problem = residual_fn(law, lam)
    params = solver_params or SolverParams()
    if warm_start is not None:
        h = max(warm_half_width, 100.0 * params.tol)
        try:
            report = solve(RootProblem(problem.f, problem.fprime, warm_start - h, warm_start + h), params)
            return report.root, report, law
        except BracketError:
            logger.debug(f"warm bracket around {warm_start!r} lost the sign change, using the full bracket")
    report = solve(problem, params)
    return report.root, report, law


def rho_and_grad(
    market: MarketModel,
    lam: LambdaFn,
    w: np.ndarray,
    solver_params: Optional[SolverParams] = None,
    warm_start: Optional[float] = None,
    warm_half_width: float = 1e-3,
) -> RhoEvaluation:
    """
    rho(w) with its gradient phi / (phi - Lambda') * (mu + (rho - mu_w) / sigma_w^2 * Sigma w).

    Raises:
        GradientUndefinedError: the portfolio density at rho does not exceed Lambda'(rho)
    """
    w = np.asarray(w, dtype=float)
    rho, report, law = portfolio_rho(market, lam, w, solver_params, warm_start, warm_half_width)
    density = law.pdf(rho)
    slope = lam.rderiv(rho)
    if not density > slope:
        raise GradientUndefinedError(density, slope, rho)
    mu_w = float(w @ market.mean)
    cov_w = market.cov @ w
    var_w = float(w @ cov_w)
    grad = density / (density - slope) * (market.mean + (rho - mu_w) / var_w * cov_w)
    return RhoEvaluation(rho, grad, report)


def project_gradient(g: np.ndarray) -> np.ndarray:
    """Project onto the tangent space {v: sum(v) = 0}."""
    g = np.asarray(g, dtype=float)
    return g - g.mean()


def _return_gap(problem: AllocationProblem, w: np.ndarray) -> float:
    # 1 - w'mu / r_min; positive when the return constraint is violated
    return 1.0 - float(w @ problem.market.mean) / problem.r_min


def _objective(problem: AllocationProblem, rho: float, w: np.ndarray, lam_w: np.ndarray, lam_r: float) -> float:
    if problem.method == Method.PENALTY:
        t = problem.penalty_t
        gap = max(_return_gap(problem, w), 0.0)
        shorts = np.maximum(-w, 0.0)
        return -rho + 0.5 * t * gap * gap + 0.5 * t * float(shorts @ shorts)
    return -rho - float(lam_w @ w) + lam_r * _return_gap(problem, w)


def _objective_gradient(
    problem: AllocationProblem, grad_rho: np.ndarray, w: np.ndarray, lam_w: np.ndarray, lam_r: float
) -> np.ndarray:
    mu = problem.market.mean
    if problem.method == Method.PENALTY:
        t = problem.penalty_t
        gap = max(_return_gap(problem, w), 0.0)
        return -grad_rho - t * gap * mu / problem.r_min - t * np.maximum(-w, 0.0)
    return -grad_rho - lam_w - lam_r * mu / problem.r_min


def penalty_objective(problem: AllocationProblem, w: np.ndarray) -> float:
    """-rho + (t/2)(1 - w'mu/r_min)_+^2 + (t/2) sum (-w_i)_+^2."""
    w = np.asarray(w, dtype=float)
    rho, _, _ = portfolio_rho(problem.market, problem.lam, w, problem.solver_params)
    t = problem.penalty_t
    gap = max(_return_gap(problem, w), 0.0)
    shorts = np.maximum(-w, 0.0)
    return -rho + 0.5 * t * gap * gap + 0.5 * t * float(shorts @ shorts)


def kkt_lagrangian(problem: AllocationProblem, w: np.ndarray, lam_w: np.ndarray, lam_r: float) -> float:
    """-rho - lam_w'w + lam_r (1 - w'mu/r_min)."""
    w = np.asarray(w, dtype=float)
    rho, _, _ = portfolio_rho(problem.market, problem.lam, w, problem.solver_params)
    return -rho - float(np.asarray(lam_w, dtype=float) @ w) + lam_r * _return_gap(problem, w)


def armijo_step(
    g_fn: Callable[[np.ndarray], float],
    grad0: np.ndarray,
    w: np.ndarray,
    eta0: float,
    c1: float,
    max_halvings: int,
    rule: ArmijoRule = ArmijoRule.STANDARD,
    g0: Optional[float] = None,
) -> Tuple[np.ndarray, int, int]:
    """
    Backtracking along -grad0: smallest j >= 0 with sufficient decrease at step eta0 * 2^-j.

    Returns:
        Tuple (w_next, halvings, fn_evals)

    Raises:
        StalledLineSearchError: no acceptable step within max_halvings halvings
    """
    w = np.asarray(w, dtype=float)
    grad0 = np.asarray(grad0, dtype=float)
    evals = 0
    if g0 is None:
        g0 = g_fn(w)
        evals += 1
    sq_norm = float(grad0 @ grad0)
    sign = -1.0 if rule == ArmijoRule.STANDARD else 1.0

    eta = eta0
    for j in range(max_halvings + 1):
        trial = w - eta * grad0
        value = g_fn(trial)
        evals += 1
        if value - g0 <= sign * c1 * eta * sq_norm:
            return trial, j, evals
        eta *= 0.5
    raise StalledLineSearchError(max_halvings, details={"objective": g0, "grad_norm": math.sqrt(sq_norm)})


def update_multipliers(
    problem: AllocationProblem, w: np.ndarray, lam_w: np.ndarray, lam_r: float
) -> Tuple[np.ndarray, float]:
    """
    Projected multiplier step after a weight update.

    lam_w <- (lam_w - s_w w)_+ and lam_r <- (lam_r +/- s_r (r_min - w'mu) / r_min)_+,
    the sign of the return step set by the multiplier rule.
    """
    descent = problem.descent
    w = np.asarray(w, dtype=float)
    lam_w = np.maximum(np.asarray(lam_w, dtype=float) - descent.multiplier_step * w, 0.0)
    direction = 1.0 if descent.multiplier_rule == MultiplierRule.ASCENT else -1.0
    lam_r = max(lam_r + direction * descent.return_multiplier_step * _return_gap(problem, w), 0.0)
    return lam_w, lam_r


def _kkt_converged(
    problem: AllocationProblem, w: np.ndarray, lam_w: np.ndarray, lam_r: float, grad_norm: float
) -> bool:
    tol = problem.descent.tol
    gap = _return_gap(problem, w)
    return (
        grad_norm < tol
        and gap <= tol
        and bool(np.all(-w <= tol))
        and abs(lam_r * gap) < tol
        and abs(float(w @ lam_w)) < tol
    )


def optimize(problem: AllocationProblem) -> OptimReport:
    """
    Minimize -rho over sum(w) = 1 subject to w'mu >= r_min and w >= 0.

    Every objective evaluation costs one Lambda-Newton-Bis call, warm-started
    at the last accepted rho plus its first-order change. KKT multipliers are
    updated once per step from the accepted weights. Non-convergence within
    max_steps is reported.
    """
    market, lam, descent = problem.market, problem.lam, problem.descent
    kkt = problem.method == Method.KKT
    w = problem.w_init.copy()
    lam_w = np.zeros(market.dim)
    lam_r = 0.0
    calls = 0
    solver_steps = 0
    history: List[DescentStep] = []

    def evaluate(v: np.ndarray, warm: Optional[float]) -> RhoEvaluation:
        nonlocal calls, solver_steps
        result = rho_and_grad(market, lam, v, problem.solver_params, warm, descent.warm_half_width)
        calls += 1
        solver_steps += result.report.steps
        return result

    current = evaluate(w, None)
    steps = 0
    converged = False
    while True:
        grad = project_gradient(_objective_gradient(problem, current.grad, w, lam_w, lam_r))
        grad_norm = float(np.linalg.norm(grad))
        if kkt:
            converged = _kkt_converged(problem, w, lam_w, lam_r, grad_norm)
        else:
            converged = grad_norm < descent.tol
        if converged or steps >= descent.max_steps:
            break

        base_w, base = w, current
        accepted = {}

        def g_fn(v: np.ndarray) -> float:
            # previous rho moved along its gradient
            trial = evaluate(v, base.rho + float(base.grad @ (v - base_w)))
            accepted["last"] = trial
            return _objective(problem, trial.rho, v, lam_w, lam_r)

        g0 = _objective(problem, current.rho, w, lam_w, lam_r)
        w_next, halvings, _ = armijo_step(
            g_fn, grad, w, descent.eta0, descent.c1, descent.max_halvings, descent.armijo_rule, g0=g0
        )
        current = accepted["last"]

        if kkt:
            # multipliers follow the accepted weights
            lam_w, lam_r = update_multipliers(problem, w_next, lam_w, lam_r)

        w = w_next
        steps += 1
        history.append(
            DescentStep(
                step=steps,
                weights=tuple(float(x) for x in w),
                rho=current.rho,
                objective=_objective(problem, current.rho, w, lam_w, lam_r),
                grad_norm=grad_norm,
                halvings=halvings,
            )
        )
        logger.debug(f"descent step {steps}: rho={current.rho!r}, |grad|={grad_norm:.3g}, halvings={halvings}")

    if not converged:
        logger.warning(f"{problem.method.value} descent stopped after {steps} steps, |grad|={grad_norm:.3g}")
    report = OptimReport(
        method=problem.method,
        weights=w,
        expected_return=float(w @ market.mean),
        rho=current.rho,
        converged=converged,
        grad_norm=grad_norm,
        descent_steps=steps,
        rho_calls=calls,
        solver_steps=solver_steps,
        multipliers_w=lam_w if kkt else None,
        multiplier_r=lam_r if kkt else None,
        history=history,
    )
    logger.info(
        f"{problem.method.value} optimization: {steps} steps, {calls} rho calls, "
        f"rho={report.rho:.6f}, converged={converged}"
    )
    return report
