import numpy as np
import pytest

from src.modules.errors import DimensionMismatchError, NotHermitianError
from src.modules.linalg.core import (
    apply,
    as_operator,
    as_state,
    basis,
    check_hermitian,
    expectation,
    inner,
    is_normalized,
    min_eigenvalue,
    mixture,
    normalize,
    outer,
    projector,
    trace,
)
from src.modules.model.operators import EXCITED, GROUND, SIGMA_MINUS, SIGMA_Z


def test_inner_conjugates_first_argument():
    assert inner(EXCITED, as_state([0, 1j])) == pytest.approx(1j)
    assert inner(as_state([0, 1j]), EXCITED) == pytest.approx(-1j)


def test_dimension_mismatch_is_reported():
    with pytest.raises(DimensionMismatchError) as e:
        inner(basis(2, 0), basis(3, 0))
    assert e.value.expected == 2
    assert e.value.received == 3

    with pytest.raises(DimensionMismatchError):
        apply(SIGMA_Z, basis(3, 1))


def test_normalize():
    psi = normalize(as_state([3, 4j]))
    assert is_normalized(psi)
    assert psi[1] == pytest.approx(0.8j)
    with pytest.raises(ValueError):
        normalize(as_state([0, 0]))


def test_constructors_return_read_only_arrays():
    psi = as_state([1, 0])
    with pytest.raises(ValueError):
        psi[0] = 2
    assert not apply(SIGMA_MINUS, EXCITED).flags.writeable


def test_outer_and_expectation():
    np.testing.assert_allclose(outer(GROUND, EXCITED), SIGMA_MINUS)
    assert expectation(SIGMA_Z, EXCITED) == pytest.approx(1.0)
    assert expectation(SIGMA_Z, GROUND) == pytest.approx(-1.0)
    assert trace(projector(normalize(as_state([1, 1j])))) == pytest.approx(1.0)


def test_check_hermitian():
    check_hermitian(SIGMA_Z)
    with pytest.raises(NotHermitianError) as e:
        check_hermitian(SIGMA_MINUS, what="hamiltonian")
    assert "non-Hermitian" in str(e.value)
    assert e.value.deviation == pytest.approx(1.0)


def test_min_eigenvalue_sees_negative_weights():
    rho = mixture([EXCITED, GROUND], [-0.2, 1.2])
    assert min_eigenvalue(rho) == pytest.approx(-0.2)
    assert min_eigenvalue(projector(EXCITED)) == pytest.approx(0.0, abs=1e-15)


def test_min_eigenvalue_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        min_eigenvalue(as_operator([[0.5, 0.1], [0.0, 0.5]]))


def test_mixture_matches_sum_of_projectors(random_state):
    states = [random_state() for _ in range(3)]
    weights = [0.5, 0.3, 0.2]
    expected = sum(w * np.outer(psi, psi.conj()) for psi, w in zip(states, weights))
    np.testing.assert_allclose(mixture(states, weights), expected, atol=1e-15)

    with pytest.raises(DimensionMismatchError):
        mixture(states, [1.0])


def test_min_eigenvalue_examples():
    assert min_eigenvalue(np.diag([0.5, 0.5]).astype(complex)) == pytest.approx(0.5)
    assert min_eigenvalue(np.diag([1.0, 0.0]).astype(complex)) == pytest.approx(0.0)


def test_algebraic_identities(random_state, rng):
    for _ in range(100):
        a, b = random_state(3), random_state(3)
        matrix = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        alpha, beta = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))

        norm_squared = inner(a, a)
        assert norm_squared.imag == 0.0
        assert norm_squared.real == pytest.approx(1.0)
        assert trace(outer(a, b)) == pytest.approx(inner(b, a), abs=1e-12)
        np.testing.assert_allclose(
            apply(matrix, alpha * a + beta * b), alpha * apply(matrix, a) + beta * apply(matrix, b), atol=1e-12
        )
