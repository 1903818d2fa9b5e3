import hashlib
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from src.modules.errors import DimensionMismatchError, ModelConfigError, NotHermitianError
from src.modules.linalg.core import (
    HERMITIAN_TOL,
    LinearOperator,
    StateVector,
    as_operator,
    as_state,
    check_hermitian,
    dagger,
    is_normalized,
    norm,
)
from src.modules.model.rates import RateFunction, eval_rate


@dataclass(frozen=True, eq=False)
class Channel:
    """A decay channel: a constant jump operator C_k paired with its time-dependent rate Delta_k(t)."""

    label: str
    operator: LinearOperator
    rate: RateFunction

    def __post_init__(self):
        object.__setattr__(self, "operator", as_operator(self.operator))
        # C^dagger C is needed for every drift evaluation
        object.__setattr__(self, "_cdc", as_operator(dagger(self.operator) @ self.operator))

    @property
    def dim(self) -> int:
        return self.operator.shape[0]

    @property
    def cdc(self) -> LinearOperator:
        """C_k^dagger C_k"""
        return self._cdc

    def delta(self, t: float) -> float:
        return eval_rate(self.rate, t)

    def with_rate(self, rate: RateFunction) -> "Channel":
        return Channel(label=self.label, operator=self.operator, rate=rate)

    def __eq__(self, other):
        if not isinstance(other, Channel):
            return NotImplemented
        return (
            self.label == other.label
            and self.rate == other.rate
            and np.array_equal(self.operator, other.operator)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """The full content of a time-local master equation: H, the channels {(C_k, Delta_k)} and the initial state.

    All invariants are checked on construction; a `ModelSpec` is immutable afterwards.

    Parameters
    ----------
        * hamiltonian: :class:`LinearOperator`
            - Hermitian to 1e-12.
        * channels: Tuple[:class:`Channel`]
        * initial_state: :class:`StateVector`
            - Normalized to 1e-10.
        * observables: Dict[:class:`str`, :class:`LinearOperator`] | {}
            - Extra named Hermitian observables carried by the model file.
        * name: :class:`str` | ""
            - The preset name the model was expanded from, if any.
    """

    hamiltonian: LinearOperator
    channels: Tuple[Channel, ...]
    initial_state: StateVector
    observables: Dict[str, LinearOperator] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "hamiltonian", as_operator(self.hamiltonian))
        object.__setattr__(self, "initial_state", as_state(self.initial_state))
        object.__setattr__(self, "channels", tuple(self.channels))
        object.__setattr__(
            self, "observables", {name: as_operator(matrix) for name, matrix in self.observables.items()}
        )
        self.validate()

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def validate(self):
        """Checks every model invariant. Raises `ModelConfigError` describing the first violation."""
        dim = self.dim

        try:
            check_hermitian(self.hamiltonian, HERMITIAN_TOL, "hamiltonian")
        except NotHermitianError as e:
            raise ModelConfigError(str(e), "hamiltonian") from e

        for idx, channel in enumerate(self.channels):
            if channel.dim != dim:
                raise ModelConfigError(
                    str(DimensionMismatchError(dim, channel.dim, f"channel '{channel.label}' operator")),
                    f"channels[{idx}].operator",
                )

        labels = [channel.label for channel in self.channels]
        if len(set(labels)) != len(labels):
            raise ModelConfigError("channel labels must be unique", "channels")

        if self.initial_state.shape[0] != dim:
            raise ModelConfigError(
                str(DimensionMismatchError(dim, self.initial_state.shape[0], "initial state")), "initial_state"
            )

        if not is_normalized(self.initial_state):
            raise ModelConfigError(
                f"initial state is not normalized (norm {norm(self.initial_state)!r})", "initial_state"
            )

        for name, matrix in self.observables.items():
            if matrix.shape != (dim, dim):
                raise ModelConfigError(
                    str(DimensionMismatchError(dim, matrix.shape[0], f"observable '{name}'")), f"observables.{name}"
                )
            try:
                check_hermitian(matrix, HERMITIAN_TOL, f"observable '{name}'")
            except NotHermitianError as e:
                raise ModelConfigError(str(e), f"observables.{name}") from e

    def channel(self, label: str) -> Channel:
        return next(channel for channel in self.channels if channel.label == label)

    def rates(self, t: float) -> Tuple[float, ...]:
        """Signed Delta_k(t) for every channel, in channel order."""
        return tuple(channel.delta(t) for channel in self.channels)

    def digest(self) -> str:
        """SHA-256 of the canonical JSON rendering; stable across runs for identical models."""
        from src.modules.model.loader import render_model

        return hashlib.sha256(render_model(self).encode("utf-8")).hexdigest()

    def __eq__(self, other):
        if not isinstance(other, ModelSpec):
            return NotImplemented
        return (
            np.array_equal(self.hamiltonian, other.hamiltonian)
            and np.array_equal(self.initial_state, other.initial_state)
            and self.channels == other.channels
            and self.observables.keys() == other.observables.keys()
            and all(np.array_equal(matrix, other.observables[name]) for name, matrix in self.observables.items())
        )

    __hash__ = None
