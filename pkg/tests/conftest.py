import numpy as np
import pytest

from wlrtr.degradation import DegradationSpec, add_gaussian_noise, add_stripes
from wlrtr.synthetic import material_scene


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def scene():
    return material_scene()


@pytest.fixture(scope="session")
def striped(scene):
    spec = DegradationSpec(sigma=5.0, stripe_fraction=0.3, stripe_amp=50.0, seed=3)
    return add_gaussian_noise(add_stripes(scene, spec), spec.sigma, spec.seed)


def column_bias_energy(x, truth):
    """Energy of the per-column mean error, summed over columns and bands."""
    return float(np.sum(np.mean(x - truth, axis=0) ** 2))
