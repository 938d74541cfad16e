import numpy as np
import pytest

from classical_limit.dataset import GenerationConfig
from classical_limit.dynamics import OscillatorParams, TimeGrid


@pytest.fixture
def paper_grid():
    return TimeGrid.uniform(10.0, 100)


@pytest.fixture
def unit_params():
    return OscillatorParams(m=1.0, omega=1.0, hbar=1.0)


def small_config(**overrides):
    kw = dict(
        hbar_values=(5.0, 2.0, 1.0, 0.5, 0.1, 0.01),
        num_ic_per_hbar=20,
        ic_low=-2.0,
        ic_high=2.0,
        t_max=10.0,
        t_steps=100,
        m=1.0,
        omega=1.0,
        seed=7,
    )
    kw.update(overrides)
    return GenerationConfig(**kw)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS):
            terminalreporter.write_line(line)
