import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rmsets import Dataset, FunctionSample

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

A, B, C, D = 0, 1, 2, 3
HOTELS = [[0.8, 0.35], [0.6, 0.6], [0.35, 0.8], [0.5, 0.3]]


@pytest.fixture
def hotels():
    return Dataset(HOTELS)


@pytest.fixture
def hotel_utilities():
    return FunctionSample.linear([[0, 1], [1, 0], [0.5, 0.5]], [0.6, 0.2, 0.2])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from .test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
