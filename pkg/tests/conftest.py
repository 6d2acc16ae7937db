import numpy as np
import pytest

from stridesim import scale_body, make_config
from stridesim.dynamics import WalkingDynamics


@pytest.fixture(scope="session")
def adult():
    return scale_body(70.0, 1.7)


@pytest.fixture(scope="session")
def default_config():
    return make_config(speed=1.0, freq=1.7, ds_ratio=0.2)


@pytest.fixture(scope="session")
def default_dyn(adult, default_config):
    return WalkingDynamics(adult, default_config)


def random_state(rng, dyn, scale=0.3):
    """A random state respecting the phase pinning (feet at rest at t=0)."""
    q = rng.normal(0.0, scale, 12)
    q[10:12] = 0.0                      # stance foot velocity
    if dyn.config.ds_time > 0.0:
        q[6:8] = 0.0                    # swing foot pinned during double support
    return q
