import math

import pytest
from hypothesis import HealthCheck, settings

from collapse_sim import FIG1_PARAMS, BlochVector

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def fig1():
    return FIG1_PARAMS


@pytest.fixture
def spin45():
    return BlochVector(math.pi / 4)
