from typing import Annotated, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, Field, model_validator, validator


class DescriptorBase(BaseModel):
    class Config:
        extra = "forbid"


# Distribution descriptors
class NormalDescriptor(DescriptorBase):
    kind: Literal["normal"]
    mu: float = 0.0
    sigma: float = Field(1.0, gt=0)


class TDescriptor(DescriptorBase):
    kind: Literal["t"]
    nu: float = Field(..., gt=0)
    mu: float = 0.0
    sigma: float = Field(1.0, gt=0)


class DoubleWeibullDescriptor(DescriptorBase):
    kind: Literal["double_weibull"]
    c: float = Field(..., gt=0)


class MixtureDescriptor(DescriptorBase):
    """Two t pieces with point masses at x_1 and x_2."""

    kind: Literal["mixture"]
    x_1: float
    x_2: float
    p_1: float = Field(..., gt=0, lt=1)
    p_2: float = Field(..., gt=0, lt=1)
    sigma_1: float = Field(..., gt=0)
    sigma_2: float = Field(..., gt=0)
    nu_1: float = Field(..., gt=0)
    nu_2: float = Field(..., gt=0)

    @model_validator(mode="after")
    def check_order(self):
        if not self.x_1 < self.x_2:
            raise ValueError("x_1 must be smaller than x_2")
        if not self.p_1 < self.p_2:
            raise ValueError("p_1 must be smaller than p_2")
        return self


class EmpiricalDescriptor(DescriptorBase):
    kind: Literal["empirical"]
    samples_csv: Optional[str] = None
    samples: Optional[List[float]] = None

    @model_validator(mode="after")
    def check_source(self):
        if (self.samples_csv is None) == (self.samples is None):
            raise ValueError("give exactly one of samples_csv or samples")
        return self


DistributionDescriptor = Annotated[
    Union[NormalDescriptor, TDescriptor, DoubleWeibullDescriptor, MixtureDescriptor, EmpiricalDescriptor],
    Field(discriminator="kind"),
]


# Lambda descriptors
class ConstantLambdaDescriptor(DescriptorBase):
    kind: Literal["constant"]
    level: float = Field(..., gt=0, lt=1)


class PwExpLambdaDescriptor(DescriptorBase):
    kind: Literal["pw_exp"]
    lambda_m: float = Field(..., gt=0, lt=1)
    lambda_M: float = Field(..., gt=0, lt=1)
    x_m: float
    x_M: float
    lambda_bar: Optional[float] = Field(None, gt=0, lt=1)

    @model_validator(mode="after")
    def check_bounds(self):
        if not self.lambda_m <= self.lambda_M:
            raise ValueError("lambda_m must not exceed lambda_M")
        if not self.x_m < self.x_M:
            raise ValueError("x_m must be smaller than x_M")
        if self.lambda_bar is not None and not self.lambda_m <= self.lambda_bar <= self.lambda_M:
            raise ValueError("lambda_bar must lie in [lambda_m, lambda_M]")
        return self


class PwLinearLambdaDescriptor(DescriptorBase):
    kind: Literal["pw_linear"]
    breakpoints: List[Tuple[float, float]] = Field(..., min_length=1)
    lambda_m: Optional[float] = Field(None, gt=0, lt=1)
    lambda_M: Optional[float] = Field(None, gt=0, lt=1)

    @validator("breakpoints")
    def check_breakpoints(cls, v):
        xs = [x for x, _ in v]
        if any(b < a for a, b in zip(xs, xs[1:])):
            raise ValueError("breakpoints must be ordered by x")
        if any(not 0 < level < 1 for _, level in v):
            raise ValueError("levels must lie in (0, 1)")
        return v


LambdaDescriptor = Annotated[
    Union[ConstantLambdaDescriptor, PwExpLambdaDescriptor, PwLinearLambdaDescriptor],
    Field(discriminator="kind"),
]


# Market descriptor
class MarketDescriptor(DescriptorBase):
    family: Literal["multivariate_normal", "multivariate_t"]
    nu: Optional[float] = Field(None, gt=0)
    mu: List[float] = Field(..., min_length=2)
    sigma_vec: List[float] = Field(..., min_length=2)
    corr: List[List[float]]

    @model_validator(mode="after")
    def check_shapes(self):
        d = len(self.mu)
        if len(self.sigma_vec) != d:
            raise ValueError("sigma_vec and mu must have the same length")
        if len(self.corr) != d or any(len(row) != d for row in self.corr):
            raise ValueError(f"corr must be a {d}x{d} matrix")
        if self.family == "multivariate_t" and self.nu is None:
            raise ValueError("multivariate_t markets need nu")
        return self
