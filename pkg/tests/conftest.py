import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from blindbrick import LogicalCircuit  # noqa: E402


def circuit(q, *ops):
    return LogicalCircuit.from_dict({"q": q, "ops": list(ops)})


@pytest.fixture
def identity_1q():
    return circuit(1, {"gate": "I", "row": 0})


@pytest.fixture
def x_1q():
    return circuit(1, {"gate": "X", "row": 0})


@pytest.fixture
def bell():
    return circuit(2, {"gate": "H", "row": 0}, {"cnot": [0, 1]})


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report(capsys):
    """Record one PASS/FAIL line for an acceptance criterion and echo it immediately."""
    def _report(number, title, ok, detail):
        line = f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'}  {title}  ({detail})"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
