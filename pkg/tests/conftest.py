import os

import numpy as np
import pytest

from dampkdv.spectral import make_grid


slow = pytest.mark.skipif(
    os.environ.get("DAMPKDV_RUN_SLOW") != "1",
    reason="Full-size reproduction run, set DAMPKDV_RUN_SLOW=1 to enable",
)


@pytest.fixture
def testdir():
    return os.path.join(os.path.dirname(os.path.abspath(__file__)), "files")


@pytest.fixture
def configdir():
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    return os.path.join(root, "configs")


@pytest.fixture
def unit_grid():
    # k_j = j
    return make_grid(np.pi, 8)


@pytest.fixture
def soliton_grid():
    return make_grid(50.0, 2048)


@pytest.fixture
def small_grid():
    return make_grid(np.pi, 64)


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)
