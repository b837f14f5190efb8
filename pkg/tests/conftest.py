import os

import pytest

from graphprog.syntax import Workspace, builtin_rules

SAMPLES = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "samples")

# filled by test_acceptance.py, printed once at the end of the session
ACCEPTANCE_LINES: list = []


@pytest.fixture(scope="session")
def env():
    return builtin_rules()


@pytest.fixture(scope="session")
def samples():
    return SAMPLES


@pytest.fixture(scope="session")
def conds():
    return Workspace().load(os.path.join(SAMPLES, "colouring.cond"))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
