"""
Root isolation for f = F - Lambda by interval enclosures on a uniform grid.

F is nondecreasing, so on a cell [a, b] with a nondecreasing Lambda the
subtraction rule gives f([a, b]) within [F(a) - Lambda(b), F(b) - Lambda(a)].
Lambdas with decreasing pieces are split at their breakpoints and bounded
piece by piece.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from lambdaq.core.exceptions import ValidationError
from lambdaq.services.distributions import Distribution
from lambdaq.services.lambda_functions import LambdaFn
from lambdaq.services.solver import RootProblem, SolveReport, SolverParams, residual_fn, solve

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Interval:
    low: float
    high: float

    def contains(self, value: float) -> bool:
        return self.low <= value <= self.high

    @property
    def width(self) -> float:
        return self.high - self.low


def interval_sub(x: Interval, y: Interval) -> Interval:
    return Interval(x.low - y.high, x.high - y.low)


def interval_hull(*xs: Interval) -> Interval:
    return Interval(min(x.low for x in xs), max(x.high for x in xs))


@dataclass(frozen=True)
class RootBox:
    lo: float
    hi: float
    range_lo: float
    range_hi: float
    contains_root: bool
    possible_root: bool

    @property
    def enclosure(self) -> Interval:
        return Interval(self.range_lo, self.range_hi)


@dataclass
class IsolationReport:
    subdivisions: int
    boxes: List[RootBox]
    candidates: List[RootBox]
    selected: Optional[int]
    leading_range: Optional[Tuple[float, float]]
    evaluations: Dict[str, int] = field(default_factory=dict)

    @property
    def root_detected(self) -> bool:
        return self.selected is not None

    @property
    def selected_box(self) -> Optional[RootBox]:
        return None if self.selected is None else self.candidates[self.selected]

    @property
    def residual_bound(self) -> Optional[float]:
        if self.leading_range is None:
            return None
        return max(abs(self.leading_range[0]), abs(self.leading_range[1]))


class _Counter:
    """Counts cdf and Lambda evaluations of one isolation run."""

    def __init__(self, dist: Distribution, lam: LambdaFn):
        self.dist = dist
        self.lam = lam
        self.cdf_calls = 0
        self.lambda_calls = 0

    def cdf(self, x: float) -> float:
        self.cdf_calls += 1
        return self.dist.cdf(x)

    def eval(self, x: float) -> float:
        self.lambda_calls += 1
        return self.lam.eval(x)

    def range_on(self, lo: float, hi: float) -> Tuple[float, float]:
        self.lambda_calls += 1
        return self.lam.range_on(lo, hi)


def _split_points(lam: LambdaFn, lo: float, hi: float) -> List[float]:
    knots = lam.breakpoints() or ()
    return [lo] + [b for b in knots if lo < b < hi] + [hi]


def _segment_enclosure(counter: _Counter, points: List[float], f_values: List[float]) -> Interval:
    parts = []
    for (a, b), (fa, fb) in zip(zip(points, points[1:]), zip(f_values, f_values[1:])):
        parts.append(interval_sub(Interval(fa, fb), Interval(*counter.range_on(a, b))))
    return interval_hull(*parts)


def range_estimate(dist: Distribution, lam: LambdaFn, lo: float, hi: float) -> Tuple[float, float]:
    """
    Certified enclosure of F - Lambda over [lo, hi].

    Raises:
        CapabilityError: Lambda is not nondecreasing and exposes no breakpoints
    """
    if lo > hi:
        raise ValidationError("range estimate needs lo <= hi", details={"lo": lo, "hi": hi})
    if lo == hi:
        value = dist.cdf(lo) - lam.eval(lo)
        return value, value
    if lam.nondecreasing:
        box = interval_sub(Interval(dist.cdf(lo), dist.cdf(hi)), Interval(lam.eval(lo), lam.eval(hi)))
        return box.low, box.high

    counter = _Counter(dist, lam)
    points = _split_points(lam, lo, hi)
    box = _segment_enclosure(counter, points, [dist.cdf(p) for p in points])
    return box.low, box.high


def isolate(dist: Distribution, lam: LambdaFn, lo: float, hi: float, subdivisions: int = 8) -> IsolationReport:
    """
    Enclose f on a uniform grid and select the leftmost certified crossing.

    Cells whose enclosure contains 0 are merged into maximal runs, the
    candidate boxes. The selected candidate is the leftmost one with
    f(lo) <= 0 < f(hi); its leading range is the enclosure of its first cell.
    """
    if subdivisions < 1:
        raise ValidationError("subdivisions must be at least 1", details={"subdivisions": subdivisions})
    if not lo < hi:
        raise ValidationError("isolation needs lo < hi", details={"lo": lo, "hi": hi})

    counter = _Counter(dist, lam)
    grid = np.linspace(lo, hi, subdivisions + 1)
    grid[0], grid[-1] = lo, hi
    cdfs = [counter.cdf(x) for x in grid]
    levels = [counter.eval(x) for x in grid]
    f_values = [c - l for c, l in zip(cdfs, levels)]
    monotone = lam.nondecreasing

    boxes = []
    for i in range(subdivisions):
        a, b = float(grid[i]), float(grid[i + 1])
        if monotone:
            enclosure = interval_sub(Interval(cdfs[i], cdfs[i + 1]), Interval(levels[i], levels[i + 1]))
        else:
            points = _split_points(lam, a, b)
            inner = [counter.cdf(p) for p in points[1:-1]]
            enclosure = _segment_enclosure(counter, points, [cdfs[i]] + inner + [cdfs[i + 1]])
        boxes.append(
            RootBox(
                lo=a,
                hi=b,
                range_lo=enclosure.low,
                range_hi=enclosure.high,
                contains_root=f_values[i] <= 0.0 < f_values[i + 1],
                possible_root=enclosure.contains(0.0),
            )
        )

    candidates: List[RootBox] = []
    leading: List[Tuple[float, float]] = []
    selected = None
    i = 0
    while i < subdivisions:
        if not boxes[i].possible_root:
            i += 1
            continue
        start = i
        while i + 1 < subdivisions and boxes[i + 1].possible_root:
            i += 1
        run = boxes[start:i + 1]
        hull = interval_hull(*(box.enclosure for box in run))
        certified = f_values[start] <= 0.0 < f_values[i + 1]
        candidates.append(RootBox(run[0].lo, run[-1].hi, hull.low, hull.high, certified, True))
        leading.append((run[0].range_lo, run[0].range_hi))
        if certified and selected is None:
            selected = len(candidates) - 1
        i += 1

    report = IsolationReport(
        subdivisions=subdivisions,
        boxes=boxes,
        candidates=candidates,
        selected=selected,
        leading_range=None if selected is None else leading[selected],
        evaluations={"cdf": counter.cdf_calls, "lambda": counter.lambda_calls},
    )
    if selected is None:
        logger.info(f"no certified sign change found on [{lo}, {hi}] with {subdivisions} cells")
    else:
        box = candidates[selected]
        logger.debug(f"selected box [{box.lo}, {box.hi}] among {len(candidates)} candidates")
    return report


def refine_isolation(
    dist: Distribution,
    lam: LambdaFn,
    lo: float,
    hi: float,
    tolerance: float,
    start: int = 8,
    max_subdivisions: int = 1024,
) -> IsolationReport:
    """Double the subdivisions until the leading range lies within +/- tolerance."""
    if not tolerance > 0:
        raise ValidationError("tolerance must be positive", details={"tolerance": tolerance})
    subdivisions = start
    total = {"cdf": 0, "lambda": 0}
    while True:
        report = isolate(dist, lam, lo, hi, subdivisions)
        for key in total:
            total[key] += report.evaluations[key]
        bound = report.residual_bound
        if (bound is not None and bound <= tolerance) or subdivisions * 2 > max_subdivisions:
            break
        subdivisions *= 2
    report.evaluations = {**report.evaluations, "total_cdf": total["cdf"], "total_lambda": total["lambda"]}
    return report


def isolate_then_solve(
    dist: Distribution,
    lam: LambdaFn,
    params: Optional[SolverParams] = None,
    subdivisions: int = 8,
    lo: Optional[float] = None,
    hi: Optional[float] = None,
) -> SolveReport:
    """Solve on the leftmost certified box; the full bracket is the default range."""
    problem = residual_fn(dist, lam)
    lo = problem.x_min if lo is None else lo
    hi = problem.x_max if hi is None else hi
    report = isolate(dist, lam, lo, hi, subdivisions)
    return solve_selected(problem, report, params)


def solve_selected(problem: RootProblem, report: IsolationReport, params: Optional[SolverParams] = None) -> SolveReport:
    box = report.selected_box
    if box is None:
        raise ValidationError(
            "no certified sign change to solve on",
            details={"subdivisions": report.subdivisions}
        )
    return solve(RootProblem(problem.f, problem.fprime, box.lo, box.hi), params)
