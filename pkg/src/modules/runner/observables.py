from typing import Dict, Iterable, Sequence

import numpy as np

from src.modules.errors import ModelConfigError
from src.modules.jumps.ensemble import EffectiveEnsemble
from src.modules.linalg.core import (
    DensityMatrix,
    LinearOperator,
    StateVector,
    basis,
    check_hermitian,
    freeze,
    mixture,
    projector,
)
from src.modules.model.model import ModelSpec
from src.modules.model.operators import SIGMA_X, SIGMA_Y, SIGMA_Z

PAULI_OBSERVABLES = {"sx": SIGMA_X, "sy": SIGMA_Y, "sz": SIGMA_Z}


def ensemble_density(ens: EffectiveEnsemble) -> DensityMatrix:
    """Returns (1/N) sum_j N_j |phi_j><phi_j|."""
    return mixture(ens.states, [count / ens.total for count in ens.counts])


def observable_average(ens: EffectiveEnsemble, observable: LinearOperator) -> float:
    """Ensemble average (1/N) sum_j N_j <phi_j|A|phi_j> of a Hermitian observable."""
    check_hermitian(observable, what="observable")
    total = 0.0
    for state, count in zip(ens.states, ens.counts):
        if count:
            total += count * float(np.real(np.vdot(state, observable @ state)))
    return total / ens.total


def density_sigma(states: Sequence[StateVector], counts: Sequence[int], total: int) -> np.ndarray:
    """Per-element Monte Carlo standard error of the reconstructed density from the multinomial statistics of the ray
    counts.

    sigma_ab^2 = (sum_j p_j |x_j|^2 - |sum_j p_j x_j|^2) / N with x_j = phi_ja phi_jb^* and p_j = N_j / N. For a single
    population this is p (1 - p) / N.
    """
    stacked = np.stack(states)
    p = np.asarray(counts, dtype=np.float64) / total
    elements = np.einsum("ja,jb->jab", stacked, stacked.conj())
    mean = np.einsum("j,jab->ab", p, elements)
    second = np.einsum("j,jab->ab", p, np.abs(elements) ** 2)
    variance = np.clip(second - np.abs(mean) ** 2, 0.0, None) / total
    return freeze(np.sqrt(variance))


def named_observable(name: str, dim: int) -> LinearOperator:
    """Built-in observables: `pop<i>` = |i><i| and, for two levels, `sx`, `sy`, `sz`."""
    if name.startswith("pop") and name[3:].isdigit():
        index = int(name[3:])
        if index >= dim:
            raise ModelConfigError(f"observable '{name}' needs at least {index + 1} levels, the model has {dim}")
        return projector(basis(dim, index))
    if name in PAULI_OBSERVABLES:
        if dim != 2:
            raise ModelConfigError(f"observable '{name}' is only defined for two-level models")
        return PAULI_OBSERVABLES[name]
    raise ModelConfigError(f"unknown observable '{name}'")


def resolve_observables(names: Iterable[str], model: ModelSpec) -> Dict[str, LinearOperator]:
    """Looks names up in the model file first, then among the built-ins. Keeps the requested order."""
    resolved: Dict[str, LinearOperator] = {}
    for name in names:
        resolved[name] = model.observables[name] if name in model.observables else named_observable(name, model.dim)
    return resolved
