import pytest

from oscibif.model import ProblemParams

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def cubic():
    return ProblemParams(3.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
