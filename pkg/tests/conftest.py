import numpy as np
import pytest

from clickguide import Click, ClickSet, make_phantom

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def sphere32():
    return make_phantom("sphere", (32, 32, 32))


def clicks_at(*positions, polarity="fg"):
    return ClickSet(tuple(Click(p, polarity) for p in positions))
