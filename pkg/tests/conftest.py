import numpy as np
import pytest

from glitchlab.arbiter import ArbiterParams
from glitchlab.funcspace import SampledSignal, TimeGrid
from glitchlab.pulses import PulseShape, default_grid

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def record():
    def _record(number, name, passed, detail=""):
        status = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES.append(f"[{number:02d}] {status}  {name}  {detail}".rstrip())
    return _record


@pytest.fixture(scope="session")
def grid():
    return default_grid()


@pytest.fixture(scope="session")
def shape():
    return PulseShape()


@pytest.fixture(scope="session")
def params():
    return ArbiterParams()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_signals(rng, grid: TimeGrid, k: int):
    return [SampledSignal(grid, np.cumsum(rng.normal(0, 0.2, grid.count))) for _ in range(k)]
