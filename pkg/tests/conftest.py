import numpy as np
import pytest
from helpers import ACCEPTANCE_LINES

from mecsched import ChannelConfig


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def channel():
    return ChannelConfig()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
