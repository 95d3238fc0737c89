from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, model_validator


class ScenarioRun(BaseModel):
    name: str
    command: Literal["quantile", "empirical", "isolate", "optimize"]
    config: Dict[str, Any]

    class Config:
        extra = "forbid"


class ScenarioCheck(BaseModel):
    """
    One acceptance check on a run's JSON result.

    path is a dotted lookup ("solve.root", "weights.0"); ops:
    approx (|actual - value| <= tol), le, ge, eq, matches (regex on a string),
    count (length of a list).
    """

    run: str
    path: str
    op: Literal["approx", "le", "ge", "eq", "matches", "count"]
    value: Any
    tol: Optional[float] = None

    class Config:
        extra = "forbid"

    @model_validator(mode="after")
    def check_tol(self):
        if self.op == "approx" and self.tol is None:
            raise ValueError("approx checks need a tol")
        return self


class Scenario(BaseModel):
    name: str
    description: str = ""
    runs: List[ScenarioRun]
    checks: List[ScenarioCheck] = []

    class Config:
        extra = "forbid"

    @model_validator(mode="after")
    def check_run_names(self):
        names = {run.name for run in self.runs}
        unknown = [check.run for check in self.checks if check.run not in names]
        if unknown:
            raise ValueError(f"checks reference unknown runs: {sorted(set(unknown))}")
        return self
