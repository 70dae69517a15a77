import numpy as np
import pytest
from hypothesis import settings

from stochpack.costs import TwoBinContext
from stochpack.model import Instance

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def ref_ctx():
    # one service of mean 160 and variance 6400 over two bins of 100
    return TwoBinContext(100.0, 100.0, 160.0, 6400.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def two_bin_instance(caps, mus, sigmas):
    return Instance.from_arrays(caps, mus, np.asarray(sigmas, dtype=float) ** 2)
