import numpy as np
import pytest

from epca.function_space import SampledPath

CRITERIA = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(CRITERIA):
        ok, detail = CRITERIA[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def sample():
    """Factory: sample a vectorised function on a grid."""
    def make(func, h=1 / 64, horizon=20, left=None):
        return SampledPath.from_function(func, h, horizon, left)
    return make
