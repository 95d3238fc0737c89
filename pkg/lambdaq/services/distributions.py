"""
Univariate distribution catalog.

Every law used by the solver, the isolation scan and the portfolio module:
- NormalDist: N(mu, sigma^2)
- LocationScaleT: location-scale Student-t
- DoubleWeibull: centered symmetric double Weibull
- DiscontinuousMixture: pieces of laws and constant plateaus joined at jumps
- EmpiricalDist: step cdf of a sample
"""
import bisect
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from lambdaq.core.exceptions import BracketError, DomainError, NoDensityError, ValidationError

logger = logging.getLogger(__name__)

MAX_DOUBLINGS = 200


def _check_finite(x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"argument must be finite, got {x!r}", details={"x": x})
    return x


class Distribution:
    """
    Abstract base class for univariate laws.

    Subclasses implement _cdf and, where a density exists, _pdf. Laws with a
    closed inverse implement _ppf; the others are bracketed by geometric
    expansion from their median.
    """

    monotone: bool = True

    @property
    def name(self) -> str:
        return type(self).__name__

    @property
    def jumps(self) -> Tuple[float, ...]:
        """Points where the cdf jumps (empty for continuous laws)."""
        return ()

    def cdf(self, x: float) -> float:
        return self._cdf(_check_finite(x))

    def pdf(self, x: float) -> float:
        return self._pdf(_check_finite(x))

    def ppf(self, p: float) -> Optional[float]:
        """Closed-form inverse cdf, or None when the law has none."""
        return None

    def median(self) -> float:
        raise NotImplementedError("Subclasses must implement median method")

    def bracket(self, p_low: float, p_high: float) -> Tuple[float, float]:
        """
        Find x_min <= x_max with cdf(x_min) <= p_low and cdf(x_max) >= p_high.

        Args:
            p_low: lower probability level
            p_high: upper probability level

        Returns:
            Tuple (x_min, x_max)
        """
        if not (0.0 < p_low <= p_high < 1.0):
            raise ValidationError(
                "bracket levels must satisfy 0 < p_low <= p_high < 1",
                details={"p_low": p_low, "p_high": p_high}
            )

        x_min = self.ppf(p_low)
        x_max = self.ppf(p_high)
        if x_min is not None and x_max is not None:
            # ppf round-off can leave cdf one ulp on the wrong side
            while self._cdf(x_min) > p_low:
                x_min = float(np.nextafter(x_min, -np.inf))
            while self._cdf(x_max) < p_high:
                x_max = float(np.nextafter(x_max, np.inf))
            return x_min, x_max

        return self._expand_bracket(p_low, p_high)

    def _expand_bracket(self, p_low: float, p_high: float) -> Tuple[float, float]:
        center = self.median()
        lo_offset = hi_offset = 0.5
        lo_ok = hi_ok = False
        for _ in range(MAX_DOUBLINGS):
            lo_ok = lo_ok or self._cdf(center - lo_offset) <= p_low
            hi_ok = hi_ok or self._cdf(center + hi_offset) >= p_high
            if lo_ok and hi_ok:
                return center - lo_offset, center + hi_offset
            if not lo_ok:
                lo_offset *= 2.0
            if not hi_ok:
                hi_offset *= 2.0
        raise BracketError(
            f"bracket expansion for {self.name} failed after {MAX_DOUBLINGS} doublings",
            details={"p_low": p_low, "p_high": p_high, "center": center}
        )

    def _cdf(self, x: float) -> float:
        raise NotImplementedError("Subclasses must implement _cdf method")

    def _pdf(self, x: float) -> float:
        raise NoDensityError(self.name, x)


@dataclass(frozen=True)
class NormalDist(Distribution):
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValidationError("sigma must be positive", details={"sigma": self.sigma})

    def _cdf(self, x: float) -> float:
        return float(stats.norm.cdf(x, loc=self.mu, scale=self.sigma))

    def _pdf(self, x: float) -> float:
        return float(stats.norm.pdf(x, loc=self.mu, scale=self.sigma))

    def ppf(self, p: float) -> Optional[float]:
        return float(stats.norm.ppf(p, loc=self.mu, scale=self.sigma))

    def median(self) -> float:
        return self.mu


@dataclass(frozen=True)
class LocationScaleT(Distribution):
    nu: float
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not self.nu > 0:
            raise ValidationError("nu must be positive", details={"nu": self.nu})
        if not self.sigma > 0:
            raise ValidationError("sigma must be positive", details={"sigma": self.sigma})

    def _cdf(self, x: float) -> float:
        return float(stats.t.cdf(x, self.nu, loc=self.mu, scale=self.sigma))

    def _pdf(self, x: float) -> float:
        return float(stats.t.pdf(x, self.nu, loc=self.mu, scale=self.sigma))

    def ppf(self, p: float) -> Optional[float]:
        return float(stats.t.ppf(p, self.nu, loc=self.mu, scale=self.sigma))

    def median(self) -> float:
        return self.mu


@dataclass(frozen=True)
class DoubleWeibull(Distribution):
    """cdf = exp(-(-x)^c)/2 for x < 0 and 1 - exp(-x^c)/2 for x >= 0."""

    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValidationError("c must be positive", details={"c": self.c})

    def _cdf(self, x: float) -> float:
        return float(stats.dweibull.cdf(x, self.c))

    def _pdf(self, x: float) -> float:
        return float(stats.dweibull.pdf(x, self.c))

    def ppf(self, p: float) -> Optional[float]:
        return float(stats.dweibull.ppf(p, self.c))

    def median(self) -> float:
        return 0.0


Piece = Union[Distribution, float]


@dataclass(frozen=True)
class DiscontinuousMixture(Distribution):
    """
    Piecewise cdf: piece i governs [breakpoints[i-1], breakpoints[i]).

    A piece is either a Distribution, whose cdf is used as is, or a float
    plateau level. Pieces are right-closed at their left end, so the cdf is
    right-continuous at every breakpoint.
    """

    breakpoints: Tuple[float, ...]
    pieces: Tuple[Piece, ...]

    def __post_init__(self):
        if len(self.pieces) != len(self.breakpoints) + 1:
            raise ValidationError(
                "a mixture needs exactly one more piece than breakpoints",
                details={"breakpoints": len(self.breakpoints), "pieces": len(self.pieces)}
            )
        if any(b >= a for a, b in zip(self.breakpoints[1:], self.breakpoints[:-1])):
            raise ValidationError("mixture breakpoints must be strictly increasing")
        for piece in (self.pieces[0], self.pieces[-1]):
            if not isinstance(piece, Distribution) and not 0.0 <= piece <= 1.0:
                raise ValidationError("plateau levels must lie in [0, 1]")
        for i, b in enumerate(self.breakpoints):
            left = self._piece_value(i, b)
            right = self._piece_value(i + 1, b)
            if right < left:
                raise ValidationError(
                    f"mixture cdf decreases at breakpoint {b}",
                    details={"left_limit": left, "value": right}
                )

    @classmethod
    def from_t_pieces(
        cls,
        x_1: float,
        x_2: float,
        p_1: float,
        p_2: float,
        sigma_1: float,
        sigma_2: float,
        nu_1: float,
        nu_2: float,
        tol: float = 1e-12,
    ) -> "DiscontinuousMixture":
        """
        Two location-scale t pieces with point masses at x_1 and x_2.

        mu_i is fixed by F_{nu_i, mu_i, sigma_i}(x_i) = p_i; between x_1 and
        x_2 the cdf sits on the plateau (p_1 + p_2) / 2.
        """
        if not x_1 < x_2:
            raise ValidationError("x_1 must be smaller than x_2")
        if not 0.0 < p_1 < p_2 < 1.0:
            raise ValidationError("levels must satisfy 0 < p_1 < p_2 < 1")
        mu_1 = _location_for_level(x_1, p_1, nu_1, sigma_1, tol)
        mu_2 = _location_for_level(x_2, p_2, nu_2, sigma_2, tol)
        logger.debug(f"mixture locations solved: mu_1={mu_1}, mu_2={mu_2}")
        return cls(
            breakpoints=(x_1, x_2),
            pieces=(
                LocationScaleT(nu_1, mu_1, sigma_1),
                0.5 * (p_1 + p_2),
                LocationScaleT(nu_2, mu_2, sigma_2),
            ),
        )

    @property
    def jumps(self) -> Tuple[float, ...]:
        return tuple(self.breakpoints)

    def _piece_value(self, index: int, x: float) -> float:
        piece = self.pieces[index]
        if isinstance(piece, Distribution):
            return piece.cdf(x)
        return float(piece)

    def _cdf(self, x: float) -> float:
        return self._piece_value(bisect.bisect_right(self.breakpoints, x), x)

    def left_limit(self, x: float) -> float:
        return self._piece_value(bisect.bisect_left(self.breakpoints, x), x)

    def _pdf(self, x: float) -> float:
        if x in self.breakpoints:
            raise NoDensityError(self.name, x)
        piece = self.pieces[bisect.bisect_right(self.breakpoints, x)]
        if isinstance(piece, Distribution):
            return piece.pdf(x)
        return 0.0

    def median(self) -> float:
        for i, b in enumerate(self.breakpoints):
            if self._piece_value(i, b) >= 0.5:
                return self._piece_median(i)
            if self._cdf(b) >= 0.5:
                return b
        return self._piece_median(len(self.pieces) - 1)

    def _piece_median(self, index: int) -> float:
        piece = self.pieces[index]
        if isinstance(piece, Distribution):
            return piece.median() if piece.ppf(0.5) is None else piece.ppf(0.5)
        # a plateau never crosses 0.5 in its interior; fall back to its left end
        return self.breakpoints[max(index - 1, 0)]


def _location_for_level(x: float, p: float, nu: float, sigma: float, tol: float) -> float:
    # mu = x - z where z solves F_{nu, 0, sigma}(z) = p
    from lambdaq.services.lambda_functions import ConstantLambda
    from lambdaq.services.solver import SolverParams, lambda_quantile

    report = lambda_quantile(
        LocationScaleT(nu, 0.0, sigma),
        ConstantLambda(p),
        SolverParams(tol=tol),
    )
    return x - report.root


@dataclass(frozen=True, eq=False)
class EmpiricalDist(Distribution):
    """Step cdf F_n(x) = #{samples <= x} / n."""

    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.sort(np.asarray(self.samples, dtype=float).ravel())
        if values.size == 0:
            raise DomainError("empirical distribution needs at least one sample")
        if not np.all(np.isfinite(values)):
            raise DomainError("samples must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "samples", values)

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "EmpiricalDist":
        return cls(np.asarray(values, dtype=float))

    @property
    def n(self) -> int:
        return int(self.samples.size)

    @property
    def jumps(self) -> Tuple[float, ...]:
        return tuple(np.unique(self.samples))

    def _cdf(self, x: float) -> float:
        return int(np.searchsorted(self.samples, x, side="right")) / self.n

    def median(self) -> float:
        return float(np.median(self.samples))


def cdf(dist: Distribution, x: float) -> float:
    return dist.cdf(x)


def pdf(dist: Distribution, x: float) -> float:
    return dist.pdf(x)


def bracket(dist: Distribution, p_low: float, p_high: float) -> Tuple[float, float]:
    return dist.bracket(p_low, p_high)
