import logging
import math

import numpy as np
import pytest

from src.modules.linalg.core import projector
from src.modules.model.model import ModelSpec
from src.modules.model.operators import EXCITED, SIGMA_X, SIGMA_Z
from src.modules.model.presets import markov_decay
from src.modules.oracle.lindblad import integrate_rk4, lindblad_rhs


def test_rhs_of_excited_state(markov):
    np.testing.assert_allclose(lindblad_rhs(projector(EXCITED), markov, 0.0), np.diag([1.0, -1.0]))
    np.testing.assert_allclose(lindblad_rhs(projector(EXCITED), markov_decay(2.5), 0.0), np.diag([2.5, -2.5]))


def test_rhs_without_dynamics_is_zero():
    model = ModelSpec(hamiltonian=np.zeros((2, 2)), channels=(), initial_state=EXCITED)
    np.testing.assert_array_equal(lindblad_rhs(projector(EXCITED), model, 1.0), np.zeros((2, 2)))


def test_rhs_is_traceless_and_hermitian(dephasing_pair, random_hermitian, rng):
    for _ in range(100):
        rho = random_hermitian()
        rhs = lindblad_rhs(rho, dephasing_pair, float(rng.uniform(0.0, 3.0)))
        assert abs(np.trace(rhs)) < 1e-13
        np.testing.assert_allclose(rhs, rhs.conj().T, atol=1e-13)


def test_markov_decay_to_one_over_e(markov):
    records = integrate_rk4(markov, projector(EXCITED), 1e-3, 1.0, record_stride=100)
    assert [record.step for record in records] == list(range(0, 1001, 100))
    final = records[-1].density
    assert final[1, 1].real == pytest.approx(math.exp(-1.0), abs=1e-8)
    assert abs(np.trace(final) - 1.0) < 1e-10


def test_oscillating_decay_closed_form(oscillating):
    for record in integrate_rk4(oscillating, projector(EXCITED), 1e-3, 2.0, record_stride=50):
        expected = math.exp(-math.sin(2 * math.pi * record.t) / (2 * math.pi))
        assert record.density[1, 1].real == pytest.approx(expected, abs=1e-8)


def test_hamiltonian_dynamics_keep_purity(random_state):
    psi = random_state()
    model = ModelSpec(hamiltonian=0.7 * SIGMA_X + 0.3 * SIGMA_Z, channels=(), initial_state=psi)
    for record in integrate_rk4(model, projector(psi), 1e-3, 1.0, record_stride=100):
        rho = record.density
        assert np.trace(rho @ rho).real == pytest.approx(1.0, abs=1e-10)


def test_fourth_order_convergence():
    model = markov_decay(5.0)
    steps = [1e-2, 5e-3, 2.5e-3]
    errors = []
    for dt in steps:
        final = integrate_rk4(model, projector(EXCITED), dt, 1.0, record_stride=1000)[-1]
        assert final.t == pytest.approx(1.0)
        errors.append(abs(final.density[1, 1].real - math.exp(-5.0)))
    slope = np.polyfit(np.log(steps), np.log(errors), 1)[0]
    assert slope == pytest.approx(4.0, abs=0.2)


def test_last_step_is_always_recorded(markov):
    records = integrate_rk4(markov, projector(EXCITED), 0.01, 0.25, record_stride=10)
    assert [record.step for record in records] == [0, 10, 20, 25]
    assert records[-1].t == pytest.approx(0.25)


def test_first_negative_step_is_logged(breakdown, caplog):
    with caplog.at_level(logging.WARNING):
        integrate_rk4(breakdown, projector(breakdown.initial_state), 1e-3, 0.2, record_stride=50)
    warnings = [record.getMessage() for record in caplog.records if record.levelno == logging.WARNING]
    assert len(warnings) == 1
    assert warnings[0].startswith("Density matrix lost positivity at step 100 ")


def test_positive_run_logs_no_warning(markov, caplog):
    with caplog.at_level(logging.WARNING):
        integrate_rk4(markov, projector(EXCITED), 1e-2, 1.0)
    assert not [record for record in caplog.records if record.levelno >= logging.WARNING]
