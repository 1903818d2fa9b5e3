import math

import numpy as np
import pytest

from src.modules.linalg.core import as_state, normalize
from src.modules.model.model import Channel, ModelSpec
from src.modules.model.operators import EXCITED, SIGMA_MINUS
from src.modules.model.presets import breakdown_toy, markov_decay, oscillating_decay, two_channel
from src.modules.model.rates import RateFunction


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_state(rng):
    """Factory of normalized random complex states."""

    def build(dim: int = 2):
        amplitudes = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        return normalize(as_state(amplitudes))

    return build


@pytest.fixture
def random_hermitian(rng):
    def build(dim: int = 2):
        matrix = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        return 0.5 * (matrix + matrix.conj().T)

    return build


@pytest.fixture
def markov():
    return markov_decay(1.0)


@pytest.fixture
def oscillating():
    return oscillating_decay(1.0, 2.0 * math.pi)


@pytest.fixture
def dephasing_pair():
    return two_channel(0.5, 1.0, 2.0, 2.0 * math.pi)


@pytest.fixture
def breakdown():
    return breakdown_toy(1.0, 0.1, 10.0)


@pytest.fixture
def constant_decay():
    """Amplitude damping at a fixed signed rate."""

    def build(rate: float) -> ModelSpec:
        return ModelSpec(
            hamiltonian=np.zeros((2, 2)),
            channels=(Channel("decay", SIGMA_MINUS, RateFunction.constant(rate)),),
            initial_state=EXCITED,
        )

    return build
