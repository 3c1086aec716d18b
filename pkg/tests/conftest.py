import mpmath as mp
import pytest

ACCEPTANCE_LINES = []


@pytest.fixture(autouse=True)
def working_precision():
    with mp.workprec(128):
        yield


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
