import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from actioncrop.evalharness import SyntheticSpec, generate_synthetic  # noqa: E402

ACCEPTANCE_RESULTS = []


@pytest.fixture(scope="session")
def small_video():
    """16-frame synthetic clip with ground truth."""
    return generate_synthetic(SyntheticSpec(n_frames=16, seed=3))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)
