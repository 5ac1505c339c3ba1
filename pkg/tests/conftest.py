import numpy as np
import pytest

from nagi.config import RunConfig
from nagi.genome import minimal_genome


@pytest.fixture
def cfg() -> RunConfig:
    return RunConfig()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def genome_1d(rng):
    return minimal_genome(1, 2, rng).with_key(0)


@pytest.fixture
def genome_2d(rng):
    return minimal_genome(2, 2, rng).with_key(0)


ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
