import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from vaxgame import CostParams, ModelParams


@pytest.fixture
def left_params() -> ModelParams:
    # endemic example setting: strong contact rate, co-existence reachable
    return ModelParams(lam=8.549, r=1.188, nu=0.904, b=0.322, d=0.1)


@pytest.fixture
def right_params() -> ModelParams:
    # weakly endemic example setting: disease eradicable by aggressive uptake
    return ModelParams(lam=1.749, r=1.0002, nu=0.404, b=0.322, d=0.1)


@pytest.fixture
def costs_for():
    """Reference cost set; the infection cost scales with the recovery rate."""

    def make(params: ModelParams, c_I2: float = 0.0) -> CostParams:
        return CostParams(
            c_v1=2.88, c_v2=0.65, c_v2_bar=1.91, c_I1=4.32 / params.r, c_I2=c_I2
        )

    return make
