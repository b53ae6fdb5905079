import math

import pytest

from qdistill.cavity import (
    Coherent,
    GaussianParticleState,
    ModelParams,
    NumberOne,
    initial_density,
    make_kernel,
)

#: Lines recorded by test_acceptance.py, echoed in the terminal summary.
ACCEPTANCE_LINES = []


@pytest.fixture
def fig1_params():
    return ModelParams(math.pi / 4, 5.0, Coherent(1.0, math.pi))


@pytest.fixture
def fig2_params():
    return ModelParams(math.pi / 4, 5.0, NumberOne())


@pytest.fixture
def fig_state():
    return GaussianParticleState(p0=0.1, x0=0.0, dp0=0.2, dx0=5.0, pi0=1 / math.sqrt(2))


@pytest.fixture
def fig1(fig1_params, fig_state):
    return make_kernel(fig1_params, fig_state), initial_density(fig_state)


@pytest.fixture
def fig2(fig2_params, fig_state):
    return make_kernel(fig2_params, fig_state), initial_density(fig_state)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
