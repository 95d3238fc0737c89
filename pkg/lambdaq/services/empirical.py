"""
Empirical lambda quantiles from sample data.
"""
import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

from lambdaq.core.exceptions import DegenerateError, DomainError, ValidationError
from lambdaq.services.distributions import EmpiricalDist
from lambdaq.services.lambda_functions import LambdaFn
from lambdaq.services.solver import SolveReport, SolverParams, lambda_quantile

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SampleSet:
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        if values.size == 0:
            raise DomainError("sample set is empty")
        if not np.all(np.isfinite(values)):
            raise DomainError("samples must be finite")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_iterable(cls, values: Iterable[float]) -> "SampleSet":
        return cls(np.fromiter((float(v) for v in values), dtype=float))

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "SampleSet":
        return read_samples_csv(path)

    @property
    def n(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class EmpiricalQuantile:
    quantile: float
    n: int
    index: int
    warning: Optional[str] = None

    @property
    def lambda_var(self) -> float:
        return -self.quantile


def read_samples_csv(path: Union[str, Path]) -> SampleSet:
    """
    One numeric value per line, UTF-8; a non-numeric first line is a header.
    """
    path = Path(path)
    try:
        handle = path.open(encoding="utf-8", newline="")
    except OSError as e:
        raise ValidationError(f"cannot read samples from {path}: {e.strerror}", details={"path": str(path)})

    values = []
    with handle:
        try:
            rows = list(csv.reader(handle))
        except (UnicodeDecodeError, csv.Error) as e:
            raise ValidationError(f"unreadable samples in {path}: {e}", details={"path": str(path)})
        for lineno, row in enumerate(rows, start=1):
            if not row or not row[0].strip():
                continue
            try:
                values.append(float(row[0]))
            except ValueError:
                if lineno == 1:
                    continue
                raise ValidationError(
                    f"non-numeric sample on line {lineno} of {path}",
                    details={"path": str(path), "line": lineno}
                )
    if not values:
        raise DomainError(f"no samples in {path}", details={"path": str(path)})
    return SampleSet(np.asarray(values, dtype=float))


def _as_sample_set(samples: Union[SampleSet, Iterable[float]]) -> SampleSet:
    if isinstance(samples, SampleSet):
        return samples
    if isinstance(samples, np.ndarray):
        return SampleSet(samples)
    return SampleSet.from_iterable(samples)


def empirical_lambda_quantile_report(samples: Union[SampleSet, Iterable[float]], lam: LambdaFn) -> EmpiricalQuantile:
    """
    First order statistic x_(j) with j/n > Lambda(x_(j)).

    Sorting dominates, so the cost is O(n log n).
    """
    sample_set = _as_sample_set(samples)
    n = sample_set.n
    ordered = np.sort(sample_set.values)

    warning = None
    if lam.lambda_m <= 1.0 / n:
        warning = (
            f"lambda_m={lam.lambda_m:g} does not exceed 1/n={1.0 / n:g}; "
            "the estimate may degenerate to the sample minimum"
        )
        logger.warning(warning)

    ranks = np.arange(1, n + 1, dtype=float) / n
    admissible = ranks > lam.eval_array(ordered)
    if not admissible.any():
        raise DegenerateError(
            "no order statistic satisfies j/n > Lambda(x_(j))",
            details={"n": n}
        )
    j = int(np.argmax(admissible))
    return EmpiricalQuantile(quantile=float(ordered[j]), n=n, index=j + 1, warning=warning)


def empirical_lambda_quantile(samples: Union[SampleSet, Iterable[float]], lam: LambdaFn) -> float:
    return empirical_lambda_quantile_report(samples, lam).quantile


def empirical_distribution_quantile(
    samples: Union[SampleSet, Iterable[float]],
    lam: LambdaFn,
    params: Optional[SolverParams] = None,
) -> SolveReport:
    """Lambda-Newton-Bis on the step cdf; every step is a bisection."""
    sample_set = _as_sample_set(samples)
    return lambda_quantile(EmpiricalDist(sample_set.values), lam, params)
