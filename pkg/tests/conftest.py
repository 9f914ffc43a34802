import numpy as np
import pytest
from hypothesis import settings

from mmqi.states import ArmAmplitudes

settings.register_profile("mmqi", max_examples=40, deadline=None)
settings.load_profile("mmqi")


def random_amps(M, rng):
    v = rng.normal(size=2 * M) + 1j * rng.normal(size=2 * M)
    return ArmAmplitudes.from_flat(v / np.linalg.norm(v))


def random_pure(dim, rng):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
