import numpy as np
import pytest

from tracevar import TracialAlgebra

ACCEPTANCE_LINES = []

BLOCK_PATTERNS = [[(2, 1.0)], [(3, 1.0)], [(2, 0.5), (2, 2.0)]]


@pytest.fixture
def m2():
    return TracialAlgebra.full_matrix(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=BLOCK_PATTERNS, ids=["M2", "M3", "M2w+M2w"])
def algebra(request):
    return TracialAlgebra(request.param)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
