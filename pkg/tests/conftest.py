import numpy as np
import pytest

from bandgap_trap import DEFAULT_SPECTRUM, derive_pseudomodes

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def default_params():
    return derive_pseudomodes(DEFAULT_SPECTRUM)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
