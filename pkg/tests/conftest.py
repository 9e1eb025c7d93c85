import numpy as np
import pytest

from projlab import Subspace

from pairs import PLANE_A, PLANE_B

_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def plane_pair():
    return Subspace(PLANE_A), Subspace(PLANE_B)


@pytest.fixture
def record_acceptance():
    """Register one PASS/FAIL line for an acceptance criterion, then assert."""

    def _record(number: int, title: str, ok: bool, detail: str = ""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}"
        if detail:
            line += f" ({detail})"
        _ACCEPTANCE[number] = line
        print(line)
        assert ok, line

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[n])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
