import numpy as np
import pytest

from codedlf.datagen import procedural_texture

ACCEPTANCE_RESULTS = []


def record(criterion, passed, detail):
    """Collect one acceptance line for the terminal summary."""
    ACCEPTANCE_RESULTS.append((criterion, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")


@pytest.fixture
def texture():
    """Factory for matchable procedural textures."""

    def make(height=128, width=160, seed=0, cells=(16.0, 8.0, 4.0)):
        return procedural_texture(height, width, seed, cells=cells)

    return make


@pytest.fixture
def sinusoid():
    def make(height, width, period_u=40.0, period_v=56.0):
        u = np.arange(width)[None, :]
        v = np.arange(height)[:, None]
        return 0.5 + 0.3 * np.sin(2 * np.pi * u / period_u) * np.cos(2 * np.pi * v / period_v)

    return make


@pytest.fixture
def acceptance():
    """Record an acceptance line; usage: ``acceptance(name, passed, detail)``."""
    return record
