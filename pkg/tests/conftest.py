import numpy as np
import pytest

from multiwell.acceptance import double_well_setup


@pytest.fixture(scope="session")
def dw():
    """Double well (a=1, b=1) at hbar = 0.2: (spec, grid, spectral, basis)."""
    return double_well_setup()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
