import numpy as np
import pytest

from improper_ic.harness import literal_channel
from improper_ic.signal_model import SignalStrategy, SisoIcInstance


def random_channel(rng, P=(1.0, 1.0), sigma2=1.0, var=(1.0, 1.0)):
    z = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / np.sqrt(2.0)
    std = np.sqrt(np.array([[var[0], var[1]], [var[1], var[0]]]))
    return SisoIcInstance(z * std, sigma2, P)


def random_strategy(rng, P=1.0):
    C = P * rng.uniform()
    return SignalStrategy(C, C * rng.uniform() * np.exp(1j * rng.uniform(-np.pi, np.pi)))


def no_interference(P=(1.0, 1.0)):
    return SisoIcInstance(np.array([[1.3 * np.exp(0.4j), 0], [0, 0.7 * np.exp(-1.1j)]]), 1.0, P)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def table_channel():
    return literal_channel("table", 10.0)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
