import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from aagate.sysmodel import CHLOROFORM  # noqa: E402

ACCEPTANCE_LINES = []

CORPUS = Path(__file__).parent / "corpus"


@pytest.fixture
def chloroform():
    return CHLOROFORM


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
