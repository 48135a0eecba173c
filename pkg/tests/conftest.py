import numpy as np
import pytest

from stabres.model import BoxGrid, ShellModel


@pytest.fixture(scope="session")
def grid():
    return BoxGrid.with_density(1.0, 30.0, 200.0)


@pytest.fixture(scope="session")
def repulsive():
    return ShellModel(20.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
