import numpy as np
import pytest

from dipsqueeze.tce import MonitorOptions

# acceptance results, filled by tests/test_acceptance.py and printed at the end
CRITERIA: dict[int, tuple[bool, str]] = {}


def record(n: int, ok: bool, detail: str) -> None:
    CRITERIA[n] = (bool(ok), detail)
    print(f"CRITERION {n:2d}: {'PASS' if ok else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"CRITERION {n:2d}: {'PASS' if ok else 'FAIL'} - {detail}")


@pytest.fixture
def free_run():
    """Monitor settings that never stop a run early."""
    return MonitorOptions(stop_on_r_max=False, stop_on_negative_variance=False)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
