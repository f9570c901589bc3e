import numpy as np
import pytest

from ltlab.geometry import DEFAULT_PAIR, sample_annuli


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def ann():
    return DEFAULT_PAIR


@pytest.fixture
def plane_points(rng, ann):
    return sample_annuli(rng, 10**4, ann)
