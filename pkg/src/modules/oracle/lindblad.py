import logging
from dataclasses import dataclass
from typing import List

import numpy as np

from src.modules.linalg.core import DensityMatrix, dagger, freeze, min_eigenvalue
from src.modules.model.model import ModelSpec

# eigenvalues above -NEGATIVITY_TOL are rounding noise of rank-deficient densities
NEGATIVITY_TOL = 1e-12


@dataclass(frozen=True)
class DensityRecord:
    """One recorded point of a deterministic density-matrix time series."""

    step: int
    t: float
    density: DensityMatrix
    ray_count: int = 0


def lindblad_rhs(rho: DensityMatrix, model: ModelSpec, t: float) -> DensityMatrix:
    """Returns -i[H, rho] + sum_k Delta_k(t) (C_k rho C_k^dagger - 1/2 {C_k^dagger C_k, rho})."""
    h = model.hamiltonian
    rhs = -1j * (h @ rho - rho @ h)
    for channel in model.channels:
        delta = channel.delta(t)
        if delta == 0.0:
            continue
        c = channel.operator
        rhs += delta * (c @ rho @ dagger(c) - 0.5 * (channel.cdc @ rho + rho @ channel.cdc))
    return freeze(rhs)


def rk4_step(rho: DensityMatrix, model: ModelSpec, t: float, dt: float) -> DensityMatrix:
    half = 0.5 * dt
    k1 = lindblad_rhs(rho, model, t)
    k2 = lindblad_rhs(rho + half * k1, model, t + half)
    k3 = lindblad_rhs(rho + half * k2, model, t + half)
    k4 = lindblad_rhs(rho + dt * k3, model, t + dt)
    return freeze(rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


def integrate_rk4(
    model: ModelSpec, rho0: DensityMatrix, dt: float, t_final: float, record_stride: int = 1
) -> List[DensityRecord]:
    """Integrates the master equation with the classic fourth-order Runge-Kutta scheme.

    Parameters
    ----------
        * model: :class:`ModelSpec`
        * rho0: :class:`DensityMatrix`
        * dt: :class:`float`
        * t_final: :class:`float`
        * record_stride: :class:`int` | 1
            - Records step 0, every `record_stride` steps and the last step, on the grid t_n = n dt.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    n_steps = int(round(t_final / dt))
    rho = freeze(np.array(rho0, dtype=np.complex128))
    records = [DensityRecord(0, 0.0, rho)]
    logging.info(f"Integrating the master equation: dt={dt}, {n_steps} steps")

    negative_seen = False
    for step in range(1, n_steps + 1):
        rho = rk4_step(rho, model, (step - 1) * dt, dt)
        if not negative_seen and min_eigenvalue(rho) < -NEGATIVITY_TOL:
            negative_seen = True
            logging.warning(f"Density matrix lost positivity at step {step} (t={step * dt!r})")
        if step % record_stride == 0 or step == n_steps:
            records.append(DensityRecord(step, step * dt, rho))

    return records
