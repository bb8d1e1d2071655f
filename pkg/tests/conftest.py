import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from splinenoise.bspline import design_matrix, make_uniform_knots, penalty_operator, uniform_abscissae

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def knots4():
    return make_uniform_knots(0.0, 1.0, 4)


@pytest.fixture(scope="session")
def penalty4(knots4):
    return penalty_operator(knots4)


@pytest.fixture(scope="session")
def design(knots4):
    def make(n):
        return design_matrix(knots4, uniform_abscissae(0.0, 1.0, n))
    return make


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
