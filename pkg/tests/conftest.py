import numpy as np
import pytest

import cga_lab as cl

# One pass/fail line per acceptance criterion, echoed after the test run
# (pytest captures stdout at the fd level, so tests report through this).
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def params10():
    return cl.make_params(10, 5, "reject", max_iterations=1000, seed=99)


@pytest.fixture
def rng():
    return cl.Rng(20240901)


def random_frequency_vector(params, rng):
    idx = np.array([rng.integers(params.n_mu + 1) for _ in range(params.n)],
                   dtype=np.int64)
    return cl.FrequencyVector(idx, params)
