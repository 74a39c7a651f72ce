import numpy as np
import pytest

from latentbandits import TransitionKernel, five_state_model, two_state_model
from latentbandits.presets import FIVE_STATE_TABLE, five_state_model_raw


@pytest.fixture
def two_state():
    return two_state_model()


@pytest.fixture
def two_state_loose():
    return two_state_model(probe_std=0.05)


@pytest.fixture
def five_state():
    return five_state_model()


@pytest.fixture
def five_state_raw():
    return five_state_model_raw()


@pytest.fixture
def switch_kernel():
    return TransitionKernel([[0.995, 0.005], [0.005, 0.995]])


@pytest.fixture
def identity2():
    return TransitionKernel.identity(2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
