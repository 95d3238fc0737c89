from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, Field, model_validator, validator

from lambdaq.core.config import settings
from lambdaq.schemas.descriptors import DistributionDescriptor, LambdaDescriptor, MarketDescriptor


class ConfigBase(BaseModel):
    class Config:
        extra = "forbid"
        populate_by_name = True


class SolverSettings(ConfigBase):
    delta: float = Field(default_factory=lambda: settings.SOLVER_DELTA)
    max_iter: int = Field(default_factory=lambda: settings.SOLVER_MAX_ITER)
    tol: float = Field(default_factory=lambda: settings.SOLVER_TOL)

    @validator("delta")
    def check_delta(cls, v):
        if not 0 < v < 0.5:
            raise ValueError("delta must lie in (0, 0.5)")
        return v

    @validator("max_iter")
    def check_max_iter(cls, v):
        if v < 1:
            raise ValueError("max_iter must be at least 1")
        return v

    @validator("tol")
    def check_tol(cls, v):
        if not v > 0:
            raise ValueError("tol must be positive")
        return v


# Request model for a parametric lambda quantile
class QuantileConfig(ConfigBase):
    distribution: DistributionDescriptor
    lambda_fn: LambdaDescriptor = Field(..., alias="lambda")
    solver: SolverSettings = Field(default_factory=SolverSettings)


# Sample-based requests: a CSV path for the CLI, inline samples over HTTP
class EmpiricalConfig(ConfigBase):
    samples_csv: str
    lambda_fn: LambdaDescriptor = Field(..., alias="lambda")


class EmpiricalRequest(ConfigBase):
    samples: List[float] = Field(..., min_length=1)
    lambda_fn: LambdaDescriptor = Field(..., alias="lambda")


class IsolateConfig(ConfigBase):
    distribution: DistributionDescriptor
    lambda_fn: LambdaDescriptor = Field(..., alias="lambda")
    solver: SolverSettings = Field(default_factory=SolverSettings)
    subdivisions: int = Field(default_factory=lambda: settings.ISOLATION_SUBDIVISIONS, ge=1)
    lo: Optional[float] = None
    hi: Optional[float] = None
    solve: bool = True
    refine_tolerance: Optional[float] = Field(None, gt=0)
    max_subdivisions: int = Field(default_factory=lambda: settings.ISOLATION_MAX_SUBDIVISIONS, ge=1)

    @model_validator(mode="after")
    def check_range(self):
        if self.lo is not None and self.hi is not None and not self.lo < self.hi:
            raise ValueError("lo must be smaller than hi")
        return self


class PenaltyMethod(ConfigBase):
    name: Literal["penalty"]
    t: float = Field(default_factory=lambda: settings.PENALTY_T, gt=0)


class KktMethod(ConfigBase):
    name: Literal["kkt"]


MethodDescriptor = Annotated[Union[PenaltyMethod, KktMethod], Field(discriminator="name")]


class OptimizeConfig(ConfigBase):
    market: MarketDescriptor
    lambda_fn: LambdaDescriptor = Field(..., alias="lambda")
    r_min: float = Field(..., gt=0)
    w_init: List[float]
    method: MethodDescriptor = Field(default_factory=lambda: PenaltyMethod(name="penalty"))
    tol: float = Field(default_factory=lambda: settings.DESCENT_TOL, gt=0)
    eta0: float = Field(default_factory=lambda: settings.ARMIJO_ETA0, gt=0)
    c1: float = Field(default_factory=lambda: settings.ARMIJO_C1, gt=0, lt=1)
    max_halvings: int = Field(default_factory=lambda: settings.ARMIJO_MAX_HALVINGS, ge=0)
    max_steps: int = Field(default_factory=lambda: settings.DESCENT_MAX_STEPS, ge=0)
    armijo_rule: Literal["standard", "relaxed"] = "standard"
    multiplier_rule: Literal["ascent", "descent"] = "ascent"
    multiplier_step: float = Field(default_factory=lambda: settings.MULTIPLIER_STEP, gt=0)
    return_multiplier_step: float = Field(default_factory=lambda: settings.RETURN_MULTIPLIER_STEP, gt=0)
    solver: SolverSettings = Field(default_factory=lambda: SolverSettings(tol=1e-12))

    @model_validator(mode="after")
    def check_weights(self):
        if len(self.w_init) != len(self.market.mu):
            raise ValueError("w_init must have one weight per asset")
        if abs(sum(self.w_init) - 1.0) > 1e-12:
            raise ValueError("w_init must sum to 1")
        return self
