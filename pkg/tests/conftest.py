import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from subquantum.doubleslit import SlitConfig
from subquantum.packet import PacketParams, PhysicalConstants

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# acceptance results collected by tests/test_acceptance.py and echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def constants():
    return PhysicalConstants()


@pytest.fixture
def packet(constants):
    return PacketParams(constants, sigma0=1.0)


@pytest.fixture
def symmetric(constants):
    return SlitConfig(constants)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
