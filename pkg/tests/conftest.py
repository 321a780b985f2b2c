import time

import pytest

from su3herald import sweep
from su3herald.scattering import InterferometerParams

# (alpha, eta1, eta2, eta3) -> reference p_d, g2, dB[X], delta
REFERENCE_ROWS = [
    ((1.0, 0.3, 0.3, 0.3), 0.15223, 26.0347, -1.16685, 0.0103),
    ((1.0, 0.6, 0.6, 0.6), 0.27011, 0.43187, -0.52375, 0.0010),
    ((1.0, 0.9, 0.9, 0.9), 0.67275, 0.97122, -0.08971, 0.0009),
    ((1.0, 0.5, 0.7, 0.5), 0.35303, 0.76685, -0.31669, 0.0009),
    ((2.0, 0.5, 0.7, 0.5), 0.03770, 1.47059, -0.43680, 0.0334),
    ((3.0, 0.5, 0.7, 0.5), 0.01392, 0.99035, 1.80934, 0.1283),
]

ROW_IDS = ["row%d" % (i + 1) for i in range(len(REFERENCE_ROWS))]

# pass/fail lines collected by the acceptance module, echoed at the end of the run
ACCEPTANCE_LINES = []


def table_params(row):
    return InterferometerParams(*row[0])


@pytest.fixture(scope="session")
def squeezing_alpha1():
    """Diagonal and full searches at alpha = 1; shared because the full one is slow."""
    out = {}
    for label, diagonal in (("diagonal", True), ("full", False)):
        start = time.perf_counter()
        out[label] = sweep.maximize_squeezing(1.0, diagonal=diagonal)
        out[label + "_seconds"] = time.perf_counter() - start
    return out


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
