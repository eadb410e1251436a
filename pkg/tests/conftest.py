import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from wavelab.spectral_core import TorusGrid

settings.register_profile("wavelab", deadline=None, max_examples=30, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("wavelab")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def grid16():
    return TorusGrid(16)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
