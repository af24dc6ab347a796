import json
from pathlib import Path

import pytest
from hypothesis import settings

from triharmonic import Problem
from triharmonic.pipeline import build_barriers

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")

ORACLE_PATH = Path(__file__).with_name("oracle_values.json")


@pytest.fixture(scope="session")
def oracle():
    return json.loads(ORACLE_PATH.read_text())


@pytest.fixture(scope="session")
def super_pair():
    return build_barriers(Problem.parse(20, "1.5xjl", 1.0))


@pytest.fixture(scope="session")
def critical_pair():
    return build_barriers(Problem.parse(20, "jl", 1.0))


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record():
    """Log one PASS/FAIL line per acceptance criterion; echoed in the terminal summary."""

    def _record(label: str, ok: bool, detail: str = "") -> bool:
        line = f"{label}: {'PASS' if ok else 'FAIL'}" + (f"  ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
