import numpy as np
import pytest

from tlres import LineSpec, LoadModel

# (criterion, status, detail) lines reported at the end of the session
ACCEPTANCE_LINES = []


def report(criterion, passed, detail):
    line = f"ACCEPTANCE {criterion}: {'PASS' if passed else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


@pytest.fixture
def acceptance_report():
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def line7():
    return LineSpec(z0=50.0, f_open=7e9)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def case_loads():
    return {
        "I": LoadModel.capacitor(47e-15),
        "II": LoadModel.capacitor(606e-15),
        "III": LoadModel.inductor(77e-12),
        "IV": LoadModel.inductor(909e-12),
    }
