"""Dense complex linear algebra for the small Hilbert spaces the simulator works with.

States are 1-D `complex128` arrays, operators and density matrices are square 2-D `complex128` arrays.
Values handed out by the constructors in this module are read-only so they can be shared between threads.
"""
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.modules.errors import DimensionMismatchError, NotHermitianError

StateVector = NDArray[np.complex128]
LinearOperator = NDArray[np.complex128]
DensityMatrix = NDArray[np.complex128]

NORMALIZATION_TOL = 1e-10
HERMITIAN_TOL = 1e-12
DENSITY_HERMITIAN_TOL = 1e-10


def freeze(array: np.ndarray) -> np.ndarray:
    """Marks an array as read-only and returns it."""
    array.setflags(write=False)
    return array


def as_state(amplitudes: ArrayLike) -> StateVector:
    """Builds an immutable state vector from any array-like of amplitudes."""
    psi = np.array(amplitudes, dtype=np.complex128)
    if psi.ndim != 1 or psi.size == 0:
        raise ValueError(f"A state vector must be a non-empty 1-D array, got shape {psi.shape}")
    return freeze(psi)


def as_operator(entries: ArrayLike) -> LinearOperator:
    """Builds an immutable square operator from any array-like of entries."""
    matrix = np.array(entries, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise ValueError(f"An operator must be a non-empty square matrix, got shape {matrix.shape}")
    return freeze(matrix)


def basis(dim: int, index: int) -> StateVector:
    """The computational basis state |index> of a `dim`-level system."""
    psi = np.zeros(dim, dtype=np.complex128)
    psi[index] = 1.0
    return freeze(psi)


def dagger(matrix: LinearOperator) -> LinearOperator:
    return matrix.conj().T


def _check_dims(expected: int, received: int, what: str):
    if expected != received:
        raise DimensionMismatchError(expected, received, what)


def inner(a: StateVector, b: StateVector) -> complex:
    """Returns <a|b>, conjugating the first argument."""
    _check_dims(a.shape[0], b.shape[0], "inner product")
    return complex(np.vdot(a, b))


def norm(psi: StateVector) -> float:
    return float(np.linalg.norm(psi))


def normalize(psi: StateVector) -> StateVector:
    """Returns psi / ||psi||. Raises `ValueError` for the zero vector."""
    length = norm(psi)
    if length == 0.0:
        raise ValueError("Cannot normalize the zero vector")
    return freeze(np.asarray(psi, dtype=np.complex128) / length)


def is_normalized(psi: StateVector, tol: float = NORMALIZATION_TOL) -> bool:
    return abs(norm(psi) - 1.0) < tol


def apply(matrix: LinearOperator, psi: StateVector) -> StateVector:
    """Matrix-vector product M|psi>; the result is not renormalized."""
    _check_dims(matrix.shape[1], psi.shape[0], "operator application")
    return freeze(matrix @ psi)


def outer(a: StateVector, b: StateVector) -> LinearOperator:
    """Returns |a><b|."""
    _check_dims(a.shape[0], b.shape[0], "outer product")
    return freeze(np.outer(a, b.conj()))


def expectation(matrix: LinearOperator, psi: StateVector) -> complex:
    """Returns <psi|M|psi>."""
    return inner(psi, apply(matrix, psi))


def trace(matrix: LinearOperator) -> complex:
    return complex(np.trace(matrix))


def hermitian_deviation(matrix: LinearOperator) -> float:
    """Largest entrywise modulus of M - M^dagger."""
    return float(np.max(np.abs(matrix - dagger(matrix)))) if matrix.size else 0.0


def check_hermitian(matrix: LinearOperator, tol: float = HERMITIAN_TOL, what: str = "matrix"):
    """Raises `NotHermitianError` unless max|M - M^dagger| < tol."""
    deviation = hermitian_deviation(matrix)
    if not deviation < tol:
        raise NotHermitianError(deviation, tol, what)


def min_eigenvalue(rho: DensityMatrix, tol: float = DENSITY_HERMITIAN_TOL) -> float:
    """Smallest eigenvalue of a Hermitian matrix, used to monitor positivity of density matrices."""
    check_hermitian(rho, tol, "density matrix")
    hermitian_part = 0.5 * (rho + dagger(rho))
    return float(np.linalg.eigvalsh(hermitian_part)[0])


def projector(psi: StateVector) -> DensityMatrix:
    """The pure-state density matrix |psi><psi|."""
    return outer(psi, psi)


def mixture(states: Sequence[StateVector], weights: Iterable[float]) -> DensityMatrix:
    """Returns sum_j w_j |phi_j><phi_j|. Weights are taken as given (they may be negative)."""
    weights = np.asarray(list(weights), dtype=np.float64)
    if len(states) != weights.shape[0]:
        raise DimensionMismatchError(len(states), weights.shape[0], "mixture weights")
    if len(states) == 0:
        raise ValueError("A mixture needs at least one state")
    stacked = np.stack(states)
    rho = np.einsum("j,ja,jb->ab", weights, stacked, stacked.conj())
    return freeze(rho)
