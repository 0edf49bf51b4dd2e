import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_labels(rng, n, min_run=1, max_run=None):
    """Binary labels of length n whose runs are all at least ``min_run`` long."""
    max_run = max_run or max(min_run, n // 3)
    out = []
    value = int(rng.integers(2))
    while len(out) < n:
        out.extend([value] * int(rng.integers(min_run, max(min_run, max_run) + 1)))
        value = 1 - value
    y = np.array(out[:n], dtype=np.int8)
    # a truncated final run may be too short; merge it into its neighbour
    last = n - 1
    while last > 0 and y[last - 1] == y[n - 1]:
        last -= 1
    if n - last < min_run and last > 0:
        y[last:] = y[last - 1]
    return y


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        passed, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
