import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Record one pass/fail line; the lines are printed in the terminal summary."""

    def record(number: int, title: str, passed: bool, detail: str = ""):
        _CRITERIA.append(f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}: {title}"
                         + (f" | {detail}" if detail else ""))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

