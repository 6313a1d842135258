from fractions import Fraction as F

import pytest

from selfsim.ifs import IFSystem, homogeneous_pair, middle_thirds


@pytest.fixture
def cantor():
    return middle_thirds()


@pytest.fixture
def quarter():
    return homogeneous_pair(F(1, 4))


@pytest.fixture
def fifth():
    return homogeneous_pair(F(1, 5))


@pytest.fixture
def three_map():
    return IFSystem.from_pairs([(F(1, 3), 0), (F(1, 4), F(9, 20)), (F(1, 5), F(4, 5))])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
