"""
Confidence-level functions Lambda: R -> [lambda_m, lambda_M].

Each family evaluates through one numpy kernel for scalars and arrays alike,
so the empirical estimator and the scalar solver see bitwise-identical levels.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from lambdaq.core.exceptions import CapabilityError, DomainError, ValidationError

logger = logging.getLogger(__name__)


class Monotonicity(str, Enum):
    CONSTANT = "constant"
    NONDECREASING = "nondecreasing"
    NONINCREASING = "nonincreasing"


@dataclass(frozen=True)
class LambdaPiece:
    left: float
    right: float
    monotonicity: Monotonicity


def _validate_bounds(lambda_m: float, lambda_M: float) -> None:
    if not 0.0 < lambda_m <= lambda_M < 1.0:
        raise ValidationError(
            "lambda bounds must satisfy 0 < lambda_m <= lambda_M < 1",
            details={"lambda_m": lambda_m, "lambda_M": lambda_M}
        )


class LambdaFn:
    """
    Abstract base class for Lambda functions.

    Subclasses provide the vectorized kernels _values, _slopes and _primitive
    (an antiderivative up to a constant) plus their breakpoints. Pieces are
    right-closed at their left end, so values are right-continuous.
    """

    lambda_m: float
    lambda_M: float

    @property
    def name(self) -> str:
        return type(self).__name__

    @property
    def bounds(self) -> Tuple[float, float]:
        return self.lambda_m, self.lambda_M

    def eval(self, x: float) -> float:
        return float(self._values(np.asarray(_finite(x))))

    def eval_array(self, xs: np.ndarray) -> np.ndarray:
        return self._values(np.asarray(xs, dtype=float))

    def rderiv(self, x: float) -> float:
        return float(self._slopes(np.asarray(_finite(x))))

    def antideriv(self, a: float, b: float) -> float:
        a, b = _finite(a), _finite(b)
        if a == b:
            return 0.0
        if a > b:
            return -self.antideriv(b, a)
        return float(self._primitive(np.asarray(b)) - self._primitive(np.asarray(a)))

    def primitive_array(self, xs: np.ndarray) -> np.ndarray:
        return self._primitive(np.asarray(xs, dtype=float))

    def breakpoints(self) -> Optional[Tuple[float, ...]]:
        """Sorted points where a new piece starts, or None when unknown."""
        return None

    def pieces(self) -> List[LambdaPiece]:
        raise NotImplementedError("Subclasses must implement pieces method")

    @property
    def nondecreasing(self) -> bool:
        return all(p.monotonicity != Monotonicity.NONINCREASING for p in self.pieces())

    def left_limit(self, x: float) -> float:
        raise NotImplementedError("Subclasses must implement left_limit method")

    def range_on(self, lo: float, hi: float) -> Tuple[float, float]:
        """
        Exact range of Lambda over [lo, hi].

        Every piece is monotone, so the extremes are attained at lo, hi or at a
        breakpoint (value or left limit).
        """
        knots = self.breakpoints()
        if knots is None:
            raise CapabilityError(
                f"{self.name} exposes no breakpoints, its range cannot be bounded",
                details={"lo": lo, "hi": hi}
            )
        values = [self.eval(lo), self.eval(hi), self.left_limit(hi)] if hi > lo else [self.eval(lo)]
        for b in knots:
            if lo < b <= hi:
                values.extend((self.left_limit(b), self.eval(b)))
        return min(values), max(values)

    def _values(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError("Subclasses must implement _values method")

    def _slopes(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError("Subclasses must implement _slopes method")

    def _primitive(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError("Subclasses must implement _primitive method")


def _finite(x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"argument must be finite, got {x!r}", details={"x": x})
    return x


@dataclass(frozen=True)
class ConstantLambda(LambdaFn):
    level: float

    def __post_init__(self):
        if not 0.0 < self.level < 1.0:
            raise ValidationError("level must lie in (0, 1)", details={"level": self.level})

    @property
    def lambda_m(self) -> float:
        return self.level

    @property
    def lambda_M(self) -> float:
        return self.level

    def breakpoints(self) -> Optional[Tuple[float, ...]]:
        return ()

    def pieces(self) -> List[LambdaPiece]:
        return [LambdaPiece(-math.inf, math.inf, Monotonicity.CONSTANT)]

    def left_limit(self, x: float) -> float:
        return self.level

    def _values(self, x: np.ndarray) -> np.ndarray:
        return np.full_like(x, self.level, dtype=float)

    def _slopes(self, x: np.ndarray) -> np.ndarray:
        return np.zeros_like(x, dtype=float)

    def _primitive(self, x: np.ndarray) -> np.ndarray:
        return self.level * x


@dataclass(frozen=True)
class PiecewiseExpLambda(LambdaFn):
    """
    lambda_m below x_m, beta * exp(alpha * x) on [x_m, x_M), lambda_M from x_M on.

    Interior values are clamped to the bounds so round-off in alpha and beta
    never leaks outside [lambda_m, lambda_M].
    """

    lambda_m: float
    lambda_M: float
    x_m: float
    x_M: float
    alpha: float
    beta: float

    def __post_init__(self):
        _validate_bounds(self.lambda_m, self.lambda_M)
        if not self.x_m < self.x_M:
            raise ValidationError("x_m must be smaller than x_M", details={"x_m": self.x_m, "x_M": self.x_M})
        if not self.beta > 0:
            raise ValidationError("beta must be positive", details={"beta": self.beta})
        slack = 1e-12
        for edge in (self.x_m, self.x_M):
            value = self.beta * math.exp(self.alpha * edge)
            if not self.lambda_m - slack <= value <= self.lambda_M + slack:
                raise ValidationError(
                    f"exponential piece leaves [lambda_m, lambda_M] at x={edge}",
                    details={"value": value}
                )

    @classmethod
    def continuous(cls, lambda_m: float, lambda_M: float, x_m: float, x_M: float) -> "PiecewiseExpLambda":
        """Join lambda_m at x_m to lambda_M at x_M without jumps."""
        return cls.with_jump(lambda_m, lambda_M, lambda_M, x_m, x_M)

    @classmethod
    def with_jump(
        cls, lambda_m: float, lambda_bar: float, lambda_M: float, x_m: float, x_M: float
    ) -> "PiecewiseExpLambda":
        """Continuous at x_m, rising to lambda_bar at x_M- and jumping to lambda_M at x_M."""
        _validate_bounds(lambda_m, lambda_M)
        if not lambda_m <= lambda_bar <= lambda_M:
            raise ValidationError(
                "lambda_bar must lie in [lambda_m, lambda_M]",
                details={"lambda_bar": lambda_bar}
            )
        if not x_m < x_M:
            raise ValidationError("x_m must be smaller than x_M", details={"x_m": x_m, "x_M": x_M})
        alpha = (math.log(lambda_bar) - math.log(lambda_m)) / (x_M - x_m)
        beta = lambda_bar * (lambda_m / lambda_bar) ** (x_M / (x_M - x_m))
        return cls(lambda_m, lambda_M, x_m, x_M, alpha, beta)

    def breakpoints(self) -> Optional[Tuple[float, ...]]:
        return (self.x_m, self.x_M)

    def pieces(self) -> List[LambdaPiece]:
        interior = Monotonicity.CONSTANT
        if self.alpha > 0:
            interior = Monotonicity.NONDECREASING
        elif self.alpha < 0:
            interior = Monotonicity.NONINCREASING
        return [
            LambdaPiece(-math.inf, self.x_m, Monotonicity.CONSTANT),
            LambdaPiece(self.x_m, self.x_M, interior),
            LambdaPiece(self.x_M, math.inf, Monotonicity.CONSTANT),
        ]

    def left_limit(self, x: float) -> float:
        if x <= self.x_m:
            return self.lambda_m
        if x <= self.x_M:
            return float(self._interior(np.asarray(x)))
        return self.lambda_M

    def _interior(self, x: np.ndarray) -> np.ndarray:
        return np.clip(self.beta * np.exp(self.alpha * x), self.lambda_m, self.lambda_M)

    def _values(self, x: np.ndarray) -> np.ndarray:
        inside = (x >= self.x_m) & (x < self.x_M)
        outer = np.where(x < self.x_m, self.lambda_m, self.lambda_M)
        return np.where(inside, self._interior(np.clip(x, self.x_m, self.x_M)), outer)

    def _slopes(self, x: np.ndarray) -> np.ndarray:
        inside = (x >= self.x_m) & (x < self.x_M)
        xc = np.clip(x, self.x_m, self.x_M)
        return np.where(inside, self.alpha * self.beta * np.exp(self.alpha * xc), 0.0)

    def _exp_integral(self, x: np.ndarray) -> np.ndarray:
        # integral of beta * exp(alpha * t) from x_m to x
        if self.alpha == 0.0:
            return self.beta * (x - self.x_m)
        return (self.beta / self.alpha) * (np.exp(self.alpha * x) - math.exp(self.alpha * self.x_m))

    def _primitive(self, x: np.ndarray) -> np.ndarray:
        xc = np.clip(x, self.x_m, self.x_M)
        top = float(self._exp_integral(np.asarray(self.x_M)))
        return np.where(
            x < self.x_m,
            self.lambda_m * (x - self.x_m),
            np.where(x < self.x_M, self._exp_integral(xc), top + self.lambda_M * (x - self.x_M)),
        )


@dataclass(frozen=True)
class PiecewiseLinearLambda(LambdaFn):
    """
    Linear interpolation through (x, level) points, constant outside them.

    Repeated x values encode jumps: the last level listed for an x applies at
    and to the right of it.
    """

    xs: Tuple[float, ...]
    levels: Tuple[float, ...]
    lambda_m: float
    lambda_M: float

    def __post_init__(self):
        if len(self.xs) == 0 or len(self.xs) != len(self.levels):
            raise ValidationError("pw_linear needs at least one (x, level) point")
        if any(b < a for a, b in zip(self.xs[:-1], self.xs[1:])):
            raise ValidationError("pw_linear breakpoints must be nondecreasing in x")
        _validate_bounds(self.lambda_m, self.lambda_M)
        if min(self.levels) < self.lambda_m or max(self.levels) > self.lambda_M:
            raise ValidationError(
                "pw_linear levels must lie in [lambda_m, lambda_M]",
                details={"levels": list(self.levels)}
            )

    @classmethod
    def from_points(
        cls,
        points: Sequence[Sequence[float]],
        lambda_m: Optional[float] = None,
        lambda_M: Optional[float] = None,
    ) -> "PiecewiseLinearLambda":
        xs = tuple(float(p[0]) for p in points)
        levels = tuple(float(p[1]) for p in points)
        if not levels:
            raise ValidationError("pw_linear needs at least one (x, level) point")
        return cls(
            xs,
            levels,
            min(levels) if lambda_m is None else lambda_m,
            max(levels) if lambda_M is None else lambda_M,
        )

    @classmethod
    def ramp(cls, lambda_m: float, lambda_M: float, x_m: float, x_M: float) -> "PiecewiseLinearLambda":
        """lambda_m below x_m, linear to lambda_M on [x_m, x_M), lambda_M above."""
        if not x_m < x_M:
            raise ValidationError("x_m must be smaller than x_M", details={"x_m": x_m, "x_M": x_M})
        return cls((x_m, x_M), (lambda_m, lambda_M), lambda_m, lambda_M)

    def breakpoints(self) -> Optional[Tuple[float, ...]]:
        return tuple(sorted(set(self.xs)))

    def pieces(self) -> List[LambdaPiece]:
        pieces = [LambdaPiece(-math.inf, self.xs[0], Monotonicity.CONSTANT)]
        for (x0, l0), (x1, l1) in zip(zip(self.xs, self.levels), zip(self.xs[1:], self.levels[1:])):
            if x1 == x0:
                continue
            kind = Monotonicity.CONSTANT
            if l1 > l0:
                kind = Monotonicity.NONDECREASING
            elif l1 < l0:
                kind = Monotonicity.NONINCREASING
            pieces.append(LambdaPiece(x0, x1, kind))
        pieces.append(LambdaPiece(self.xs[-1], math.inf, Monotonicity.CONSTANT))
        return pieces

    @property
    def nondecreasing(self) -> bool:
        # jumps count too
        return all(b >= a for a, b in zip(self.levels[:-1], self.levels[1:]))

    def _segment(self, x: np.ndarray, side: str):
        xs = np.asarray(self.xs)
        lv = np.asarray(self.levels)
        # i: last knot at or left of x (side="right") or strictly left of x (side="left")
        i = np.clip(np.searchsorted(xs, x, side=side) - 1, 0, max(len(xs) - 2, 0))
        j = np.minimum(i + 1, len(xs) - 1)
        width = xs[j] - xs[i]
        safe = np.where(width > 0, width, 1.0)
        slope = np.where(width > 0, (lv[j] - lv[i]) / safe, 0.0)
        return xs, lv, i, slope

    def _values(self, x: np.ndarray) -> np.ndarray:
        xs, lv, i, slope = self._segment(x, "right")
        inner = lv[i] + slope * (x - xs[i])
        return np.where(x < xs[0], lv[0], np.where(x >= xs[-1], lv[-1], inner))

    def left_limit(self, x: float) -> float:
        xv = np.asarray(_finite(x))
        xs, lv, i, slope = self._segment(xv, "left")
        if x <= xs[0]:
            return float(lv[0])
        if x > xs[-1]:
            return float(lv[-1])
        return float(lv[i] + slope * (xv - xs[i]))

    def _slopes(self, x: np.ndarray) -> np.ndarray:
        xs, _, _, slope = self._segment(x, "right")
        return np.where((x < xs[0]) | (x >= xs[-1]), 0.0, slope)

    def _primitive(self, x: np.ndarray) -> np.ndarray:
        xs = np.asarray(self.xs)
        lv = np.asarray(self.levels)
        # cumulative trapezoids from xs[0] to each knot
        areas = np.concatenate(([0.0], np.cumsum(0.5 * (lv[1:] + lv[:-1]) * np.diff(xs))))
        _, _, i, slope = self._segment(x, "right")
        dx = x - xs[i]
        inner = areas[i] + lv[i] * dx + 0.5 * slope * dx * dx
        return np.where(
            x < xs[0],
            lv[0] * (x - xs[0]),
            np.where(x >= xs[-1], areas[-1] + lv[-1] * (x - xs[-1]), inner),
        )


def eval(lam: LambdaFn, x: float) -> float:
    return lam.eval(x)


def rderiv(lam: LambdaFn, x: float) -> float:
    return lam.rderiv(x)


def antideriv(lam: LambdaFn, a: float, b: float) -> float:
    return lam.antideriv(a, b)
