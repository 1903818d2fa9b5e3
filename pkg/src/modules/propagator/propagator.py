"""Deterministic drift of pure states under the effective non-Hermitian Hamiltonian.

The normalized drift is

    d|psi>/dt = (-i H_eff(t) + 1/2 sum_k Delta_k(t) ||C_k psi||^2) |psi>,
    H_eff(t) = H - i/2 sum_k Delta_k(t) C_k^dagger C_k,

which keeps |psi> on the unit sphere to first order. Signed rates are used throughout.
"""
from dataclasses import dataclass
from typing import Literal

import numpy as np

from src.modules.errors import PropagationError
from src.modules.linalg.core import DensityMatrix, LinearOperator, StateVector, freeze, outer
from src.modules.model.model import ModelSpec

PropagatorMethod = Literal["first-order", "rk4"]


@dataclass(frozen=True)
class PropagatorConfig:
    """Step settings of the deterministic propagator.

    Parameters
    ----------
        * dt: :class:`float`
            - Step size, > 0.
        * renormalize_each_step: :class:`bool` | True
            - Explicitly rescale every output to unit norm.
        * method: Literal[`first-order`, `rk4`] | `rk4`
            - `first-order` applies one literal increment, `rk4` integrates the nonlinear ODE with the classic tableau.
    """

    dt: float
    renormalize_each_step: bool = True
    method: PropagatorMethod = "rk4"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if self.method not in ("first-order", "rk4"):
            raise ValueError(f"unknown propagator method '{self.method}'")


def effective_hamiltonian(model: ModelSpec, t: float) -> LinearOperator:
    """Returns H - (i/2) sum_k Delta_k(t) C_k^dagger C_k."""
    h_eff = np.array(model.hamiltonian, dtype=np.complex128)
    for channel in model.channels:
        h_eff -= 0.5j * channel.delta(t) * channel.cdc
    return freeze(h_eff)


def _generator(psi: StateVector, model: ModelSpec, t: float) -> np.ndarray:
    """Right-hand side of the normalized drift ODE at (psi, t)."""
    rhs = -1j * (model.hamiltonian @ psi)
    for channel in model.channels:
        delta = channel.delta(t)
        if delta == 0.0:
            continue
        cdc_psi = channel.cdc @ psi
        weight = float(np.real(np.vdot(psi, cdc_psi)))  # ||C_k psi||^2
        rhs += 0.5 * delta * (weight * psi - cdc_psi)
    return rhs


def drift_increment(psi: StateVector, model: ModelSpec, t: float, dt: float) -> StateVector:
    """Returns |delta psi> = dt (-i H_eff + 1/2 sum_k Delta_k ||C_k psi||^2)|psi>; the caller forms psi + delta psi."""
    return freeze(dt * _generator(psi, model, t))


def _rk4(psi: StateVector, model: ModelSpec, t: float, dt: float) -> np.ndarray:
    half = 0.5 * dt
    k1 = _generator(psi, model, t)
    k2 = _generator(psi + half * k1, model, t + half)
    k3 = _generator(psi + half * k2, model, t + half)
    k4 = _generator(psi + dt * k3, model, t + dt)
    return psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def propagate(psi: StateVector, model: ModelSpec, t: float, cfg: PropagatorConfig) -> StateVector:
    """Advances a normalized state by one step of size `cfg.dt`.

    Parameters
    ----------
        * psi: :class:`StateVector`
            - Normalized input state.
        * model: :class:`ModelSpec`
        * t: :class:`float`
            - Start of the step.
        * cfg: :class:`PropagatorConfig`

    Raises
    ----------
        * :class:`PropagationError`
            - If the step annihilates the state (dt far too large or a pathological model).
    """
    if cfg.method == "rk4":
        out = _rk4(psi, model, t, cfg.dt)
    else:
        out = psi + cfg.dt * _generator(psi, model, t)

    length = float(np.linalg.norm(out))
    if not np.isfinite(length) or length < 1e-12:
        raise PropagationError(f"state norm vanished to {length!r} during a step at t={t!r} with dt={cfg.dt!r}")

    if cfg.renormalize_each_step:
        out = out / length
    return freeze(out)


def pure_density_increment(psi: StateVector, model: ModelSpec, t: float, dt: float) -> DensityMatrix:
    """Returns the increment of rho_psi = |psi><psi| over [t, t + dt).

    delta rho_psi = dt (-i[H, rho_psi] - 1/2 sum_k Delta_k {C_k^dagger C_k, rho_psi}
                       + rho_psi sum_k Delta_k ||C_k psi||^2),

    which is traceless for every normalized psi.
    """
    rho = outer(psi, psi)
    h = model.hamiltonian
    increment = -1j * (h @ rho - rho @ h)
    for channel in model.channels:
        delta = channel.delta(t)
        if delta == 0.0:
            continue
        weight = float(np.real(np.vdot(psi, channel.cdc @ psi)))
        increment += delta * (weight * rho - 0.5 * (channel.cdc @ rho + rho @ channel.cdc))
    return freeze(dt * increment)
