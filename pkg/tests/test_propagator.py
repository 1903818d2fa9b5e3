import math

import numpy as np
import pytest
from scipy.linalg import expm

from src.modules.errors import PropagationError
from src.modules.linalg.core import as_state, is_normalized, normalize
from src.modules.model.model import ModelSpec
from src.modules.model.operators import EXCITED, SIGMA_X, SIGMA_Z
from src.modules.model.presets import markov_decay
from src.modules.propagator.propagator import (
    PropagatorConfig,
    drift_increment,
    effective_hamiltonian,
    propagate,
    pure_density_increment,
)

PLUS = normalize(as_state([1, 1]))


def fidelity(a, b) -> float:
    return abs(np.vdot(a, b)) ** 2


def evolve(psi, model, dt, t_final, method="rk4"):
    cfg = PropagatorConfig(dt=dt, method=method)
    for step in range(int(round(t_final / dt))):
        psi = propagate(psi, model, step * dt, cfg)
    return psi


def test_effective_hamiltonian(markov):
    np.testing.assert_allclose(effective_hamiltonian(markov, 0.0), np.diag([0, -0.5j]))


def test_excited_state_is_a_fixed_point(markov):
    np.testing.assert_allclose(drift_increment(EXCITED, markov, 0.0, 0.01), 0.0, atol=1e-16)
    np.testing.assert_allclose(evolve(EXCITED, markov, 0.01, 1.0), EXCITED, atol=1e-14)


def test_rk4_matches_matrix_exponential(markov):
    t_final = 1.0
    psi = evolve(PLUS, markov, 0.01, t_final)
    expected = normalize(expm(-1j * effective_hamiltonian(markov, 0.0) * t_final) @ PLUS)
    assert is_normalized(psi)
    assert 1.0 - fidelity(psi, expected) < 1e-10


def test_rk4_with_hamiltonian_and_decay():
    model = ModelSpec(
        hamiltonian=0.7 * SIGMA_X + 0.3 * SIGMA_Z,
        channels=markov_decay(2.0).channels,
        initial_state=PLUS,
    )
    psi = evolve(PLUS, model, 0.005, 0.5)
    expected = normalize(expm(-1j * effective_hamiltonian(model, 0.0) * 0.5) @ PLUS)
    assert 1.0 - fidelity(psi, expected) < 1e-10


def test_first_order_is_less_accurate(markov):
    expected = normalize(expm(-1j * effective_hamiltonian(markov, 0.0) * 1.0) @ PLUS)
    first_order = 1.0 - fidelity(evolve(PLUS, markov, 0.01, 1.0, "first-order"), expected)
    rk4 = 1.0 - fidelity(evolve(PLUS, markov, 0.01, 1.0), expected)
    assert rk4 < first_order
    assert first_order < 1e-4


def test_time_dependent_rate_follows_integrated_decay(oscillating):
    # the (g + e) superposition keeps e-amplitude exp(-Gamma(t) / 2) relative to g
    t_final = 0.4
    psi = evolve(PLUS, oscillating, 0.001, t_final)
    integrated = math.sin(2 * math.pi * t_final) / (2 * math.pi)
    expected = normalize(as_state([1.0, math.exp(-0.5 * integrated)]))
    assert 1.0 - fidelity(psi, expected) < 1e-10


def test_pure_density_increment_is_traceless(dephasing_pair, random_state, rng):
    for _ in range(100):
        psi = random_state()
        t = float(rng.uniform(0.0, 2.0))
        increment = pure_density_increment(psi, dephasing_pair, t, 0.01)
        assert abs(np.trace(increment)) < 1e-12
        np.testing.assert_allclose(increment, increment.conj().T, atol=1e-15)


def test_vanishing_state_raises(markov):
    with np.errstate(all="ignore"):
        with pytest.raises(PropagationError):
            propagate(PLUS, markov, 0.0, PropagatorConfig(dt=1e200))


def test_propagator_config_validation():
    with pytest.raises(ValueError):
        PropagatorConfig(dt=0.0)
    with pytest.raises(ValueError):
        PropagatorConfig(dt=0.1, method="euler")


def test_drift_increment_examples(markov):
    increment = drift_increment(PLUS, markov, 0.0, 1e-3)
    np.testing.assert_allclose(increment, 1e-3 / (4 * math.sqrt(2)) * np.array([1, -1]), atol=1e-15)

    closed = ModelSpec(hamiltonian=np.diag([0.0, 1.0]).astype(complex), channels=(), initial_state=EXCITED)
    np.testing.assert_allclose(drift_increment(EXCITED, closed, 0.0, 1e-3), -1e-3j * EXCITED, atol=1e-15)


def test_first_order_norm_error_is_second_order(markov):
    deviations = []
    for dt in (1e-2, 5e-3):
        cfg = PropagatorConfig(dt=dt, method="first-order", renormalize_each_step=False)
        deviations.append(abs(np.linalg.norm(propagate(PLUS, markov, 0.0, cfg)) - 1.0))
    assert deviations[0] / deviations[1] == pytest.approx(4.0, rel=1e-3)


def test_unitary_limit_matches_exponential():
    model = ModelSpec(hamiltonian=0.7 * SIGMA_X + 0.2 * SIGMA_Z, channels=(), initial_state=PLUS)
    cfg = PropagatorConfig(dt=1e-3, renormalize_each_step=False)
    out = propagate(PLUS, model, 0.0, cfg)
    assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-12)
    assert fidelity(out, expm(-1e-3j * model.hamiltonian) @ PLUS) > 1 - 1e-10


def test_density_increment_matches_state_increment(dephasing_pair, random_state):
    dt = 1e-6
    for _ in range(20):
        psi = random_state()
        moved = psi + drift_increment(psi, dephasing_pair, 0.3, dt)
        expected = np.outer(moved, moved.conj()) - np.outer(psi, psi.conj())
        np.testing.assert_allclose(pure_density_increment(psi, dephasing_pair, 0.3, dt), expected, atol=1e-10)
