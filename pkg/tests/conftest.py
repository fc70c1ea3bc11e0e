import numpy as np
import pytest

from gptbell import spaces


@pytest.fixture(scope="session")
def builtin():
    """Small built-in spaces used across the invariant tests."""
    return [spaces.classical(2), spaces.classical(3), spaces.squit(), spaces.polygon(5), spaces.polygon(6)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    lines = []
    for name, mod in list(sys.modules.items()):
        if name.endswith("test_acceptance") and hasattr(mod, "LINES"):
            lines = mod.LINES
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
