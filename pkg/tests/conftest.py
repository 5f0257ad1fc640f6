import time
from contextlib import contextmanager

import pytest

ACCEPTANCE: list[str] = []


@contextmanager
def criterion(label: str, limit: float):
    """Time a block; record one PASS/FAIL line and enforce the time limit."""
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        within = elapsed < limit
        status = "PASS" if ok and within else "FAIL"
        note = "" if within else f" (over {limit:g}s limit)"
        line = f"{status} {label} [{elapsed:.2f}s]{note}"
        ACCEPTANCE.append(line)
        print(line)
    assert within, f"{label}: {elapsed:.2f}s exceeds {limit}s"


@pytest.fixture
def accept():
    return criterion


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
