import numpy as np
import pytest

from tvyw.spectral import ArSnapshot
from tvyw.tvar import pacf_to_ar


def stable_snapshot(rng, p, delta=0.9, sigma=None):
    """Random snapshot with all characteristic roots outside 1/delta."""
    pacf = rng.uniform(-0.95, 0.95, size=p)
    theta = pacf_to_ar(pacf, delta=delta)
    if sigma is None:
        sigma = float(rng.uniform(0.5, 2.0))
    return ArSnapshot(theta=theta, sigma=sigma)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
