import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from chromatic_tiler.color import build_coloring
from chromatic_tiler.geom import ConvexBody
from chromatic_tiler.tiling import hexagonal_tiling, square_tiling, tiling_parameters

settings.register_profile(
    "repo",
    deadline=None,
    max_examples=60,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

SQRT3 = math.sqrt(3)
HEX_DELTA = 1 / (4 * math.log(2))


@pytest.fixture(scope="session")
def disk():
    return ConvexBody.ball(2)


@pytest.fixture(scope="session")
def hex_tiling():
    return hexagonal_tiling()


@pytest.fixture(scope="session")
def square():
    return square_tiling(2)


@pytest.fixture(scope="session")
def hex_params(hex_tiling, disk):
    return tiling_parameters(hex_tiling, disk)


@pytest.fixture(scope="session")
def hex_run():
    return build_coloring({"construction": "hexagonal"})


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
