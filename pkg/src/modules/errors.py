from typing import Optional

import numpy as np

from src.typings.nmqj import BreakdownRecord, StepFailureRecord


class NMQJError(Exception):
    """Base class of every error raised by the simulator."""


class DimensionMismatchError(NMQJError):
    """Raised when operands of a linear-algebra operation have incompatible shapes."""

    def __init__(self, expected: int, received: int, what: str = "operand"):
        super().__init__(f"Dimension mismatch for {what}: expected {expected}, got {received}")
        self.expected = expected
        self.received = received


class NotHermitianError(NMQJError):
    """Raised when a matrix that must be Hermitian is not, within the given tolerance."""

    def __init__(self, deviation: float, tol: float, what: str = "matrix"):
        super().__init__(f"{what} is non-Hermitian: max|M - M^dagger| = {deviation:.3e} > {tol:.1e}")
        self.deviation = deviation
        self.tol = tol


class ModelConfigError(NMQJError):
    """Raised when a model configuration cannot be parsed or violates a model invariant.

    Parameters
    ----------
        * message: :class:`str`
        * field: Optional[:class:`str`] | None
            - Dotted path of the offending field, e.g. `channels[0].rate.params`.
        * line: Optional[:class:`int`] | None
        * column: Optional[:class:`int`] | None
    """

    def __init__(
        self, message: str, field: Optional[str] = None, line: Optional[int] = None, column: Optional[int] = None
    ):
        location = []
        if line is not None:
            location.append(f"line {line}, column {column}")
        if field is not None:
            location.append(f"field '{field}'")
        super().__init__(f"{message} ({'; '.join(location)})" if location else message)
        self.message = message
        self.field = field
        self.line = line
        self.column = column


class RateDomainError(NMQJError):
    """Raised when a tabulated rate is evaluated outside of its breakpoints."""

    def __init__(self, t: float, start: float, end: float):
        super().__init__(f"t={t!r} lies outside the tabulated rate range [{start!r}, {end!r}]")
        self.t = t


class PropagationError(NMQJError):
    """Raised when the non-unitary step annihilates a state (vanishing norm)."""


class ZeroImageError(NMQJError):
    """Raised when a jump operator maps a state onto the zero vector."""


class RaySetOverflow(NMQJError):
    """Raised when the number of distinct rays exceeds the configured cap."""

    def __init__(self, count: int, cap: int):
        super().__init__(f"Ray set grew to {count} rays (cap {cap}); the model is not effectively finite")
        self.count = count
        self.cap = cap


class PositivityBreakdown(NMQJError):
    """Raised when a reverse jump would have to leave a ray that carries no weight.

    The conditional reverse-jump probability diverges at that point, so the simulation cannot continue.

    Parameters
    ----------
        * source_ray: :class:`int`
            - Index of the zero-weight ray the reverse jump would originate from.
        * target_ray: :class:`int`
            - Index of the populated ray the reverse jump would restore.
        * channel: :class:`str`
        * rate: :class:`float`
            - The (negative) decay rate at the time of failure.
        * target_count: :class:`int`
    """

    def __init__(
        self,
        source_ray: int,
        target_ray: int,
        channel: str,
        rate: float,
        target_count: int,
        step: Optional[int] = None,
        t: Optional[float] = None,
    ):
        super().__init__()
        self.source_ray = source_ray
        self.target_ray = target_ray
        self.channel = channel
        self.rate = rate
        self.target_count = target_count
        self.step = step
        self.t = t
        self.source_state: Optional[np.ndarray] = None

    def __str__(self):
        where = f" at step {self.step} (t={self.t!r})" if self.step is not None else ""
        return (
            f"Positivity breakdown{where}: reverse jump on channel '{self.channel}' (rate {self.rate!r}) "
            f"from empty ray {self.source_ray} towards ray {self.target_ray} holding {self.target_count} members"
        )

    def to_record(self) -> BreakdownRecord:
        """Returns a JSON-ready description of the failure."""
        record: BreakdownRecord = {
            "error": "PositivityBreakdown",
            "step": self.step,
            "t": self.t,
            "source_ray": self.source_ray,
            "target_ray": self.target_ray,
            "channel": self.channel,
            "rate": self.rate,
            "target_count": self.target_count,
            "message": str(self),
        }
        if self.source_state is not None:
            record["source_state"] = [[float(amp.real), float(amp.imag)] for amp in self.source_state]
        return record


class TimestepTooLarge(NMQJError):
    """Raised when the jump probability of a single ray in one step exceeds `p_max`."""

    def __init__(
        self,
        ray: int,
        probability: float,
        p_max: float,
        dt: float,
        step: Optional[int] = None,
        t: Optional[float] = None,
    ):
        super().__init__()
        self.ray = ray
        self.probability = probability
        self.p_max = p_max
        self.dt = dt
        self.step = step
        self.t = t

    @property
    def suggested_dt(self) -> float:
        if self.probability <= 0:
            return self.dt
        return self.dt * self.p_max / self.probability

    def __str__(self):
        where = f" at step {self.step} (t={self.t!r})" if self.step is not None else ""
        return (
            f"Jump probability {self.probability:.4g} of ray {self.ray} exceeds p_max={self.p_max}{where}; "
            f"retry with dt <= {self.suggested_dt:.3e}"
        )

    def to_record(self) -> StepFailureRecord:
        return {
            "error": "TimestepTooLarge",
            "step": self.step,
            "t": self.t,
            "ray": self.ray,
            "probability": self.probability,
            "p_max": self.p_max,
            "suggested_dt": self.suggested_dt,
            "message": str(self),
        }


class GridMismatchError(NMQJError):
    """Raised when two runs cannot be compared: different models or different recorded time grids."""
