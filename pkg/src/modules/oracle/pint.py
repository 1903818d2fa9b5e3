"""Deterministic integration of the probability drift on a finite set of rays.

Ray weights are quasi-probabilities: they follow the signed-rate drift equation exactly and turn negative when a
negative rate empties a ray, where the jump unravelling would break down.
"""
import logging
from typing import List, Optional, Sequence

import numpy as np

from src.modules.errors import RaySetOverflow
from src.modules.jumps.engine import signed_flux
from src.modules.jumps.ensemble import RAY_TOLERANCE, canonicalize, ray_equivalent
from src.modules.linalg.core import DensityMatrix, StateVector, min_eigenvalue, mixture
from src.modules.model.model import ModelSpec
from src.modules.oracle.lindblad import NEGATIVITY_TOL, DensityRecord
from src.modules.propagator.propagator import PropagatorConfig, propagate

DEFAULT_MAX_RAYS = 4096


class WeightedEnsemble:
    """Distinct rays with real, possibly negative, weights summing to one.

    Parameters
    ----------
        * states: Sequence[:class:`StateVector`]
        * weights: Sequence[:class:`float`]
        * tol: :class:`float` | 1e-10
            - Ray-equivalence tolerance.
    """

    def __init__(self, states: Sequence[StateVector], weights: Sequence[float], tol: float = RAY_TOLERANCE):
        if len(states) != len(weights):
            raise ValueError("every ray needs exactly one weight")
        self.tol = tol
        self.states: List[StateVector] = []
        self.weights: List[float] = []
        for state, weight in zip(states, weights):
            idx = self.find_or_add(state)
            self.weights[idx] += float(weight)

    @classmethod
    def pure(cls, psi: StateVector, tol: float = RAY_TOLERANCE):
        return cls([psi], [1.0], tol)

    def __len__(self):
        return len(self.states)

    def find(self, psi: StateVector) -> Optional[int]:
        return next((idx for idx, phi in enumerate(self.states) if ray_equivalent(phi, psi, self.tol)), None)

    def find_or_add(self, psi: StateVector) -> int:
        """Index of the ray of psi, appending it with weight 0 if it is absent."""
        idx = self.find(psi)
        if idx is None:
            self.states.append(canonicalize(psi))
            self.weights.append(0.0)
            idx = len(self.states) - 1
        return idx

    @property
    def ray_count(self) -> int:
        """Rays with a nonzero weight, the same count the jump runner reports for populated rays."""
        return sum(1 for weight in self.weights if weight != 0.0)

    @property
    def total(self) -> float:
        return float(np.sum(self.weights))

    def copy(self) -> "WeightedEnsemble":
        clone = WeightedEnsemble.__new__(WeightedEnsemble)
        clone.tol = self.tol
        clone.states = list(self.states)
        clone.weights = list(self.weights)
        return clone


def p_integrator_step(
    wens: WeightedEnsemble,
    model: ModelSpec,
    t: float,
    dt: float,
    propagator: Optional[PropagatorConfig] = None,
    max_rays: int = DEFAULT_MAX_RAYS,
) -> WeightedEnsemble:
    """Advances a weighted ensemble from t to t + dt.

    The weights take one explicit step of the signed drift equation evaluated at t; the rays then drift with the same
    propagator the jump simulation uses, and rays that became equivalent are merged by adding their weights.

    Raises
    ----------
        * :class:`RaySetOverflow`
            - If the ray set grows beyond `max_rays`.
    """
    propagator = propagator or PropagatorConfig(dt=dt)
    current = wens.copy()

    increments = signed_flux(list(current.states), list(current.weights), current, model, t, dt)
    weights = np.asarray(current.weights, dtype=np.float64) + increments

    drifted = [propagate(psi, model, t, propagator) for psi in current.states]
    successor = WeightedEnsemble(drifted, weights.tolist(), wens.tol)
    if len(successor) > max_rays:
        raise RaySetOverflow(len(successor), max_rays)
    return successor


def wens_density(wens: WeightedEnsemble) -> DensityMatrix:
    """Returns sum_j w_j |phi_j><phi_j|; unit trace, not necessarily positive."""
    return mixture(wens.states, wens.weights)


def integrate_pint(
    model: ModelSpec,
    dt: float,
    t_final: float,
    record_stride: int = 1,
    max_rays: int = DEFAULT_MAX_RAYS,
    propagator: Optional[PropagatorConfig] = None,
) -> List[DensityRecord]:
    """Integrates the quasi-probability weights from the model's initial state on the grid t_n = n dt.

    Parameters
    ----------
        * model: :class:`ModelSpec`
        * dt: :class:`float`
        * t_final: :class:`float`
        * record_stride: :class:`int` | 1
        * max_rays: :class:`int` | 4096
        * propagator: Optional[:class:`PropagatorConfig`] | None
            - Ray drift settings, rk4 with renormalization by default.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    propagator = propagator or PropagatorConfig(dt=dt)
    n_steps = int(round(t_final / dt))
    wens = WeightedEnsemble.pure(model.initial_state)
    records = [DensityRecord(0, 0.0, wens_density(wens), wens.ray_count)]
    logging.info(f"Integrating ray weights: dt={dt}, {n_steps} steps, cap {max_rays} rays")

    negative_seen = False
    for step in range(1, n_steps + 1):
        wens = p_integrator_step(wens, model, (step - 1) * dt, dt, propagator, max_rays)
        density = wens_density(wens)
        if not negative_seen and min_eigenvalue(density) < -NEGATIVITY_TOL:
            negative_seen = True
            logging.warning(f"Weighted density lost positivity at step {step} (t={step * dt!r})")
        if step % record_stride == 0 or step == n_steps:
            records.append(DensityRecord(step, step * dt, density, wens.ray_count))

    return records
