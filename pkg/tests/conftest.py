import math

import numpy as np
import pytest

from zerofilter.spectral import Grid

ACCEPTANCE = {}


@pytest.fixture
def small_grid():
    return Grid(math.pi, 256)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def record_criterion(number, passed, detail):
    ACCEPTANCE[number] = (passed, detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
