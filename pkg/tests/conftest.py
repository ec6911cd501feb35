import numpy as np
import pytest
from hypothesis import settings

from starcurl.geometry import ball
from starcurl.operators import CurlInverseOp

settings.register_profile("numeric", deadline=None, max_examples=25)
settings.load_profile("numeric")


@pytest.fixture(scope="session")
def op():
    return CurlInverseOp(ball(2.0))


@pytest.fixture
def rng():
    return np.random.default_rng(0)
