import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.modules.errors import PositivityBreakdown, TimestepTooLarge
from src.modules.jumps.engine import (
    DEFAULT_P_MAX,
    Direction,
    JumpProposal,
    Transfer,
    enumerate_proposals,
    sample_transitions,
)
from src.modules.jumps.ensemble import RAY_TOLERANCE, EffectiveEnsemble
from src.modules.jumps.streams import RandomStreams
from src.modules.linalg.core import DensityMatrix, StateVector, min_eigenvalue
from src.modules.model.model import ModelSpec
from src.modules.propagator.propagator import PropagatorConfig, PropagatorMethod, propagate
from src.modules.runner.observables import density_sigma, ensemble_density
from src.utils.config import SimulationConfig


@dataclass(frozen=True)
class RunConfig:
    """Settings of one NMQJ simulation.

    Parameters
    ----------
        * dt: :class:`float`
        * t_final: :class:`float`
        * ensemble_size: :class:`int`
            - N, the number of simulated trajectories.
        * seed: :class:`int`
        * record_stride: :class:`int` | 1
            - A snapshot is kept every `record_stride` steps, plus the first and the last step.
        * ray_tolerance: :class:`float` | 1e-10
        * p_max: :class:`float` | 0.1
        * workers: :class:`int` | 1
            - Threads used to propagate the rays. Results do not depend on it.
        * method: Literal[`first-order`, `rk4`] | `rk4`
        * renormalize_each_step: :class:`bool` | True
    """

    dt: float
    t_final: float
    ensemble_size: int
    seed: int
    record_stride: int = 1
    ray_tolerance: float = RAY_TOLERANCE
    p_max: float = DEFAULT_P_MAX
    workers: int = 1
    method: PropagatorMethod = "rk4"
    renormalize_each_step: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not self.t_final >= 0:
            raise ValueError(f"t_final must be non-negative, got {self.t_final!r}")
        if self.ensemble_size < 1:
            raise ValueError(f"ensemble_size must be at least 1, got {self.ensemble_size}")
        if self.record_stride < 1:
            raise ValueError(f"record_stride must be at least 1, got {self.record_stride}")
        if not 0 < self.ray_tolerance < 1:
            raise ValueError(f"ray_tolerance must lie in (0, 1), got {self.ray_tolerance!r}")
        if not 0 < self.p_max <= 1:
            raise ValueError(f"p_max must lie in (0, 1], got {self.p_max!r}")
        if self.workers < 1:
            raise ValueError(f"workers must be at least 1, got {self.workers}")

    @classmethod
    def from_config(cls, config: Optional[SimulationConfig] = None, **overrides):
        """Builds a `RunConfig` from `simulation.yaml`; keyword arguments that are not `None` win."""
        config = config or SimulationConfig()
        fields: Dict[str, Any] = {**config.run_defaults, **config.propagator_defaults}
        fields["p_max"] = config.p_max
        fields["workers"] = config.workers
        fields.update({key: value for key, value in overrides.items() if value is not None})
        return cls(
            dt=float(fields["dt"]),
            t_final=float(fields["t_final"]),
            ensemble_size=int(fields["ensemble_size"]),
            seed=int(fields["seed"]),
            record_stride=int(fields["record_stride"]),
            ray_tolerance=float(fields["ray_tolerance"]),
            p_max=float(fields["p_max"]),
            workers=int(fields["workers"]),
            method=fields["method"],
            renormalize_each_step=bool(fields["renormalize_each_step"]),
        )

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    @property
    def propagator(self) -> PropagatorConfig:
        return PropagatorConfig(dt=self.dt, renormalize_each_step=self.renormalize_each_step, method=self.method)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "dt": self.dt,
            "t_final": self.t_final,
            "ensemble_size": self.ensemble_size,
            "seed": self.seed,
            "record_stride": self.record_stride,
            "ray_tolerance": self.ray_tolerance,
            "p_max": self.p_max,
            "workers": self.workers,
            "method": self.method,
            "renormalize_each_step": self.renormalize_each_step,
        }


@dataclass(frozen=True)
class EnsembleSnapshot:
    """The effective ensemble at one recorded time, with its reconstructed density matrix."""

    step: int
    t: float
    rays: Tuple[Tuple[StateVector, int], ...]
    density: DensityMatrix
    min_eigenvalue: float
    total: int

    @property
    def counts(self) -> List[int]:
        return [count for _, count in self.rays]

    @property
    def ray_count(self) -> int:
        """Number of populated rays."""
        return sum(1 for _, count in self.rays if count > 0)

    @property
    def sigma(self) -> np.ndarray:
        return density_sigma([state for state, _ in self.rays], self.counts, self.total)


@dataclass(frozen=True)
class JumpLogEntry:
    """Jumps of one channel and direction during one step."""

    step: int
    t: float
    channel: str
    direction: Direction
    proposals: int
    transfers: int


def snapshot_of(ens: EffectiveEnsemble, step: int, t: float) -> EnsembleSnapshot:
    density = ensemble_density(ens)
    return EnsembleSnapshot(
        step=step,
        t=t,
        rays=ens.snapshot(),
        density=density,
        min_eigenvalue=min_eigenvalue(density),
        total=ens.total,
    )


class NMQJRunner:
    """Runs the non-Markovian quantum jump unravelling of a model on the effective ensemble.

    Every step drifts all rays deterministically, merges rays that became equivalent, evaluates the jump proposals at
    the new time and moves members between rays. Snapshots and the jump log survive a failed run so callers can
    report the partial trajectory.

    Parameters
    ----------
        * model: :class:`ModelSpec`
        * cfg: :class:`RunConfig`
    """

    def __init__(self, model: ModelSpec, cfg: RunConfig):
        self.model = model
        self.cfg = cfg
        self.snapshots: List[EnsembleSnapshot] = []
        self.jump_log: List[JumpLogEntry] = []
        self.ensemble = EffectiveEnsemble.pure(model.initial_state, cfg.ensemble_size, cfg.ray_tolerance)
        self._streams = RandomStreams(cfg.seed)
        self._propagator = cfg.propagator
        self._executor: Optional[ThreadPoolExecutor] = None

    def run(self) -> List[EnsembleSnapshot]:
        """Runs every step and returns the recorded snapshots.

        Raises
        ----------
            * :class:`PositivityBreakdown`
            * :class:`TimestepTooLarge`
                - Both carry the failing step and time; `self.snapshots` then ends at the last completed step.
        """
        cfg = self.cfg
        n_steps = cfg.n_steps
        logging.info(
            f"Starting NMQJ run: N={cfg.ensemble_size}, dt={cfg.dt}, {n_steps} steps, seed={cfg.seed}, "
            f"{cfg.workers} worker(s)"
        )
        started = time.perf_counter()
        self.snapshots = [snapshot_of(self.ensemble, 0, 0.0)]

        if cfg.workers > 1:
            self._executor = ThreadPoolExecutor(max_workers=cfg.workers)
        try:
            for step in range(1, n_steps + 1):
                try:
                    self.step(step)
                except (PositivityBreakdown, TimestepTooLarge) as e:
                    e.step = step
                    e.t = step * cfg.dt
                    self._record(step - 1)
                    logging.error(str(e))
                    raise
                if step % cfg.record_stride == 0 or step == n_steps:
                    self._record(step)
        finally:
            if self._executor is not None:
                self._executor.shutdown()
                self._executor = None

        logging.info(
            f"NMQJ run finished in {time.perf_counter() - started:.2f}s with {len(self.ensemble.populated)} "
            f"populated ray(s) out of {len(self.ensemble)}"
        )
        return self.snapshots

    def step(self, step: int):
        """Advances the ensemble from t_{step-1} to t_step."""
        cfg = self.cfg
        t_start = (step - 1) * cfg.dt
        t = step * cfg.dt
        # the step works on a copy so a failure leaves the last completed step intact
        ens = self.ensemble.copy()

        ens.replace_states(self._propagate_all(ens.states, t_start))
        merges = ens.merge_equivalent()
        if merges:
            logging.debug(f"Step {step}: merged {merges} ray(s) after drift")

        ray_count = len(ens)
        proposals = enumerate_proposals(ens, self.model, t, cfg.dt, cfg.p_max)
        if len(ens) > ray_count:
            logging.debug(f"Step {step}: ray set grew to {len(ens)} rays")

        transfers = sample_transitions(ens, proposals, self._streams, step)
        ens.apply_transfers(transfers)
        self.ensemble = ens
        self._log_jumps(step, t, proposals, transfers)

    def _propagate_all(self, states: List[StateVector], t: float) -> List[StateVector]:
        if self._executor is None:
            return [propagate(psi, self.model, t, self._propagator) for psi in states]
        # map keeps ray order whatever the completion order
        return list(self._executor.map(lambda psi: propagate(psi, self.model, t, self._propagator), states))

    def _record(self, step: int):
        if self.snapshots and self.snapshots[-1].step == step:
            return
        self.snapshots.append(snapshot_of(self.ensemble, step, step * self.cfg.dt))

    def _log_jumps(
        self, step: int, t: float, proposals: Dict[int, List[JumpProposal]], transfers: List[Transfer]
    ):
        entries: Dict[Tuple[str, Direction], List[int]] = {}
        for ray_proposals in proposals.values():
            for proposal in ray_proposals:
                entries.setdefault((proposal.channel, proposal.direction), [0, 0])[0] += 1
        for transfer in transfers:
            entries[(transfer.channel, transfer.direction)][1] += transfer.count

        for (channel, direction), (count, transferred) in entries.items():
            self.jump_log.append(JumpLogEntry(step, t, channel, direction, count, transferred))


def run(model: ModelSpec, cfg: RunConfig) -> List[EnsembleSnapshot]:
    """Runs the NMQJ simulation of `model` and returns its snapshots."""
    return NMQJRunner(model, cfg).run()
