import numpy as np
import pytest

from complab.qmatrix import RngSpec

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return RngSpec(seed=20240607).generator()


@pytest.fixture
def record_criterion():
    def record(number, title, passed, detail=""):
        status = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES.append(f"[{status}] criterion {number:>2}: {title} -- {detail}")
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def fig2_vectors():
    """Normalized caption vectors, built independently of the package."""
    psi = np.array([1, 3, 2]) / np.sqrt(14)
    d = np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]]) / np.sqrt(2)
    return psi, d
