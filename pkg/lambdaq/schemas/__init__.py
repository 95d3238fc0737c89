from lambdaq.schemas.descriptors import DistributionDescriptor, LambdaDescriptor, MarketDescriptor
from lambdaq.schemas.reports import (
    EmpiricalResult,
    IsolateResult,
    OptimizeResult,
    QuantileResult,
    ScenarioOutcome,
)
from lambdaq.schemas.requests import (
    EmpiricalConfig,
    EmpiricalRequest,
    IsolateConfig,
    OptimizeConfig,
    QuantileConfig,
    SolverSettings,
)
from lambdaq.schemas.scenario import Scenario

__all__ = [
    "DistributionDescriptor",
    "LambdaDescriptor",
    "MarketDescriptor",
    "EmpiricalResult",
    "IsolateResult",
    "OptimizeResult",
    "QuantileResult",
    "ScenarioOutcome",
    "EmpiricalConfig",
    "EmpiricalRequest",
    "IsolateConfig",
    "OptimizeConfig",
    "QuantileConfig",
    "SolverSettings",
    "Scenario",
]
