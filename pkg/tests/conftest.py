import numpy as np
import pytest

from src.constants import PhysicalConstants
from src.models import WaveModel


@pytest.fixture
def natural():
    return PhysicalConstants.natural()


@pytest.fixture
def si():
    return PhysicalConstants.si()


@pytest.fixture
def central_model(natural):
    """nu = 1, kappa = 1, k = 1 at E = -hbar^2 kappa^2 / 2m."""
    return WaveModel.central_field(1.0, 1.0, 1, -0.5)


@pytest.fixture
def dirac_model():
    return WaveModel.dirac_string(1.0, 1.0, 2, -0.5)


@pytest.fixture
def off_axis_points():
    rng = np.random.default_rng(12345)
    r = rng.uniform(0.3, 4.0, 40)
    theta = rng.uniform(0.3, np.pi - 0.3, 40)
    phi = rng.uniform(0.0, 2.0 * np.pi, 40)
    return np.column_stack([
        r * np.sin(theta) * np.cos(phi),
        r * np.sin(theta) * np.sin(phi),
        r * np.cos(theta),
    ])
