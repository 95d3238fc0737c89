"""
Descriptor models -> domain objects.
"""
import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np

from lambdaq.schemas.descriptors import (
    ConstantLambdaDescriptor,
    DoubleWeibullDescriptor,
    EmpiricalDescriptor,
    MarketDescriptor,
    MixtureDescriptor,
    NormalDescriptor,
    PwExpLambdaDescriptor,
    PwLinearLambdaDescriptor,
    TDescriptor,
)
from lambdaq.schemas.requests import OptimizeConfig, SolverSettings
from lambdaq.services.distributions import (
    DiscontinuousMixture,
    Distribution,
    DoubleWeibull,
    EmpiricalDist,
    LocationScaleT,
    NormalDist,
)
from lambdaq.services.empirical import read_samples_csv
from lambdaq.services.lambda_functions import (
    ConstantLambda,
    LambdaFn,
    PiecewiseExpLambda,
    PiecewiseLinearLambda,
)
from lambdaq.services.portfolio import (
    AllocationProblem,
    ArmijoRule,
    DescentParams,
    MarketFamily,
    MarketModel,
    Method,
    MultiplierRule,
)
from lambdaq.services.solver import SolverParams

logger = logging.getLogger(__name__)


def resolve_path(path: str, base_dir: Optional[Path] = None) -> Path:
    candidate = Path(path)
    if not candidate.is_absolute() and base_dir is not None:
        candidate = base_dir / candidate
    return candidate


def build_distribution(descriptor, base_dir: Optional[Path] = None) -> Distribution:
    if isinstance(descriptor, NormalDescriptor):
        return NormalDist(descriptor.mu, descriptor.sigma)
    if isinstance(descriptor, TDescriptor):
        return LocationScaleT(descriptor.nu, descriptor.mu, descriptor.sigma)
    if isinstance(descriptor, DoubleWeibullDescriptor):
        return DoubleWeibull(descriptor.c)
    if isinstance(descriptor, MixtureDescriptor):
        return DiscontinuousMixture.from_t_pieces(
            descriptor.x_1,
            descriptor.x_2,
            descriptor.p_1,
            descriptor.p_2,
            descriptor.sigma_1,
            descriptor.sigma_2,
            descriptor.nu_1,
            descriptor.nu_2,
        )
    if isinstance(descriptor, EmpiricalDescriptor):
        if descriptor.samples is not None:
            return EmpiricalDist.from_values(descriptor.samples)
        samples = read_samples_csv(resolve_path(descriptor.samples_csv, base_dir))
        return EmpiricalDist(samples.values)
    raise TypeError(f"unsupported distribution descriptor {type(descriptor).__name__}")


def build_lambda(descriptor) -> LambdaFn:
    if isinstance(descriptor, ConstantLambdaDescriptor):
        return ConstantLambda(descriptor.level)
    if isinstance(descriptor, PwExpLambdaDescriptor):
        if descriptor.lambda_bar is None:
            return PiecewiseExpLambda.continuous(
                descriptor.lambda_m, descriptor.lambda_M, descriptor.x_m, descriptor.x_M
            )
        return PiecewiseExpLambda.with_jump(
            descriptor.lambda_m, descriptor.lambda_bar, descriptor.lambda_M, descriptor.x_m, descriptor.x_M
        )
    if isinstance(descriptor, PwLinearLambdaDescriptor):
        return PiecewiseLinearLambda.from_points(descriptor.breakpoints, descriptor.lambda_m, descriptor.lambda_M)
    raise TypeError(f"unsupported lambda descriptor {type(descriptor).__name__}")


def build_market(descriptor: MarketDescriptor) -> MarketModel:
    return MarketModel.from_vol_corr(
        MarketFamily(descriptor.family),
        descriptor.mu,
        descriptor.sigma_vec,
        descriptor.corr,
        descriptor.nu,
    )


def build_solver_params(solver: Union[SolverSettings, None]) -> SolverParams:
    if solver is None:
        return SolverParams.from_settings()
    return SolverParams(delta=solver.delta, max_iter=solver.max_iter, tol=solver.tol)


def build_problem(config: OptimizeConfig) -> AllocationProblem:
    method = Method(config.method.name)
    penalty_t = getattr(config.method, "t", 100.0)
    descent = DescentParams.from_settings(
        eta0=config.eta0,
        c1=config.c1,
        tol=config.tol,
        max_halvings=config.max_halvings,
        max_steps=config.max_steps,
        armijo_rule=ArmijoRule(config.armijo_rule),
        multiplier_rule=MultiplierRule(config.multiplier_rule),
        multiplier_step=config.multiplier_step,
        return_multiplier_step=config.return_multiplier_step,
    )
    return AllocationProblem(
        market=build_market(config.market),
        lam=build_lambda(config.lambda_fn),
        r_min=config.r_min,
        w_init=np.asarray(config.w_init, dtype=float),
        method=method,
        penalty_t=penalty_t,
        solver_params=build_solver_params(config.solver),
        descent=descent,
    )
