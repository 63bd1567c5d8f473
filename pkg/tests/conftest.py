import numpy as np
import pytest

from reconbars import shepp_logan


@pytest.fixture(scope="session")
def phantom64():
    return shepp_logan((64, 64))


@pytest.fixture(scope="session")
def phantom32():
    return shepp_logan((32, 32))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
