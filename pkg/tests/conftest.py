import numpy as np
import pytest

from bayesdrift import Discrete, Gaussian, GaussianMixture

TWO_POINT = Discrete(((-1.0, 0.5), (1.0, 0.5)))
THREE_POINT = Discrete(((-2.0, 0.3), (1.0, 0.4), (3.0, 0.3)))
GAUSSIAN = Gaussian(0.3, 1.5)
MIXTURE = GaussianMixture(((0.4, -1.0, 0.5), (0.6, 1.5, 1.0)))

BATTERY = {
    "two_point": TWO_POINT,
    "three_point": THREE_POINT,
    "gaussian": GAUSSIAN,
    "mixture": MIXTURE,
}

# lines printed by the acceptance suite, shown in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(params=sorted(BATTERY), ids=sorted(BATTERY))
def battery_prior(request):
    return BATTERY[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
