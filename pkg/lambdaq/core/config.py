import json
from typing import List

from pydantic import validator
from pydantic_settings import BaseSettings

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class Settings(BaseSettings):
    # Base settings
    SERVICE_NAME: str = "lambdaq"
    API_V1_STR: str = "/api/v1"
    LOG_LEVEL: str = "INFO"

    # CORS
    CORS_ORIGINS: List[str] = ["http://localhost:3000", "http://localhost:8000"]

    @validator("CORS_ORIGINS", pre=True)
    def parse_cors_origins(cls, v):
        if isinstance(v, str):
            try:
                return json.loads(v)
            except json.JSONDecodeError:
                return [i.strip() for i in v.split(",") if i]
        return v

    # Output
    LAMBDAQ_OUTPUT_DIR: str = "lambdaq_output"
    FLOAT_SIGNIFICANT_DIGITS: int = 12
    REPRODUCE_WORKERS: int = 1

    # Lambda-Newton-Bis defaults
    SOLVER_DELTA: float = 0.01
    SOLVER_MAX_ITER: int = 100
    SOLVER_TOL: float = 1e-8

    # Interval isolation
    ISOLATION_SUBDIVISIONS: int = 8
    ISOLATION_MAX_SUBDIVISIONS: int = 1024

    # Portfolio descent
    DESCENT_TOL: float = 1e-3
    DESCENT_MAX_STEPS: int = 10000
    PENALTY_T: float = 100.0
    ARMIJO_ETA0: float = 2.0
    ARMIJO_C1: float = 0.1
    ARMIJO_MAX_HALVINGS: int = 40
    MULTIPLIER_STEP: float = 0.1
    RETURN_MULTIPLIER_STEP: float = 2.0
    WARM_START_MIN_HALF_WIDTH: float = 1e-3

    @validator("LOG_LEVEL", pre=True)
    def parse_log_level(cls, v):
        if isinstance(v, str):
            v = v.strip().upper()
            if v not in LOG_LEVELS:
                raise ValueError(f"unknown log level {v}")
        return v

    class Config:
        case_sensitive = True
        env_file = ".env"


settings = Settings()
