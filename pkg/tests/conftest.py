import numpy as np
import pytest

from cournot_duo import Model

MODELS = list(Model)
COSTS = ["quadratic", "linear"]


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)


def pytest_terminal_summary(terminalreporter):
    from acceptance_report import lines

    out = lines()
    if out:
        terminalreporter.section("acceptance criteria")
        for line in out:
            terminalreporter.write_line(line)
