import json
import math
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from lambdaq.main import app
from lambdaq.services.distributions import DiscontinuousMixture, DoubleWeibull, LocationScaleT, NormalDist
from lambdaq.services.lambda_functions import PiecewiseExpLambda, PiecewiseLinearLambda
from lambdaq.services.portfolio import MarketFamily, MarketModel
from lambdaq.services.reproduce import SCENARIO_DIR
from lambdaq.services.runner import LambdaQService

X_M_EXAMPLE = math.log(0.001)
X_UPPER_EXAMPLE = math.log(0.6)
CORR_3 = [[1.0, 0.4, 0.08], [0.4, 1.0, 0.2], [0.08, 0.2, 1.0]]


# Catalog laws and Lambda functions
@pytest.fixture
def example_normal():
    return NormalDist(0.0, 1.0 / 3.0)


@pytest.fixture
def example_lambda():
    return PiecewiseExpLambda.continuous(1e-4, 0.06, X_M_EXAMPLE, X_UPPER_EXAMPLE)


@pytest.fixture
def student_t():
    return LocationScaleT(3.0, 0.1, 1.0 / 3.0)


@pytest.fixture
def student_t_lambda():
    return PiecewiseExpLambda.continuous(0.05, 0.1, math.log(0.5), 0.0)


@pytest.fixture
def dweibull():
    return DoubleWeibull(5.07)


@pytest.fixture
def dweibull_lambda():
    return PiecewiseExpLambda.continuous(0.1, 0.6, -3.0, 1.0)


@pytest.fixture
def mixture():
    return DiscontinuousMixture.from_t_pieces(-65.0, -60.0, 0.2, 0.6, 1.0, 2.0, 3.0, 4.0)


@pytest.fixture
def mixture_lambda_smooth():
    return PiecewiseExpLambda.with_jump(0.05, 0.2, 0.3, -80.0, -40.0)


@pytest.fixture
def mixture_lambda_jump():
    return PiecewiseExpLambda.with_jump(0.1, 0.25, 0.35, -78.0, -65.0)


@pytest.fixture
def standard_normal():
    return NormalDist(0.0, 1.0)


@pytest.fixture
def multi_root_lambda():
    return PiecewiseLinearLambda.from_points([(-2.8, 0.01), (-1.0, 0.1), (-0.6, 0.3)])


@pytest.fixture
def ramp_lambda():
    return PiecewiseLinearLambda.ramp(0.025, 0.05, -0.257, 0.277)


# Markets
@pytest.fixture
def two_asset_market():
    return MarketModel.from_vol_corr(
        MarketFamily.NORMAL, [0.01, 0.02], [0.1, 0.15], [[1.0, 0.4], [0.4, 1.0]]
    )


@pytest.fixture
def three_asset_normal_market():
    return MarketModel.from_vol_corr(MarketFamily.NORMAL, [0.013, 0.014, 0.02], [0.13, 0.0145, 0.15], CORR_3)


@pytest.fixture
def three_asset_t_market():
    return MarketModel.from_vol_corr(MarketFamily.T, [0.013, 0.014, 0.02], [0.13, 0.145, 0.15], CORR_3, nu=3.0)


# Configs, service and client
@pytest.fixture
def scenario_config():
    def load(name: str, run: str) -> dict:
        scenario = json.loads((SCENARIO_DIR / f"{name}.json").read_text(encoding="utf-8"))
        return next(r["config"] for r in scenario["runs"] if r["name"] == run)

    return load


@pytest.fixture
def write_json(tmp_path: Path):
    def write(payload, name: str = "config.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return path

    return write


@pytest.fixture
def service():
    return LambdaQService()


@pytest.fixture
def client():
    return TestClient(app)


# Lambda drops below F at x = -0.2 between two segments steeper than the portfolio density
JUMP_POINTS = [[-0.21, 0.03], [-0.2, 0.04], [-0.2, 0.01], [-0.195, 0.015]]


@pytest.fixture
def jump_lambda():
    return PiecewiseLinearLambda.from_points(JUMP_POINTS)


@pytest.fixture
def undefined_gradient_config():
    return {
        "market": {
            "family": "multivariate_normal",
            "mu": [0.01, 0.02],
            "sigma_vec": [0.1, 0.15],
            "corr": [[1.0, 0.4], [0.4, 1.0]],
        },
        "lambda": {"kind": "pw_linear", "breakpoints": JUMP_POINTS},
        "r_min": 0.015,
        "w_init": [0.5, 0.5],
    }
