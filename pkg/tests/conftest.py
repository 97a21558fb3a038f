import math

import pytest

from ancred.effects import ConfidenceInterval, TwoByTwoTable, ci_to_estimate, from_two_by_two


def pe_closed_form(t, t0, c):
    """Independent route to p_E: the extrinsic equation is a quadratic in 1/z^2."""
    import mpmath as mp

    t2, t02 = mp.mpf(t) ** 2, mp.mpf(t0) ** 2
    u = ((t2 + t02) + mp.sqrt((t2 - t02) ** 2 + 4 * c * t2 * t02)) / (2 * t2 * t02)
    return float(mp.erfc(1 / mp.sqrt(u) / mp.sqrt(2)))


@pytest.fixture
def hayward():
    return from_two_by_two(TwoByTwoTable(102, 288, 75, 277))


@pytest.fixture
def external():
    return ci_to_estimate(ConfidenceInterval(math.log(1.31), math.log(2.02), 0.95))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
