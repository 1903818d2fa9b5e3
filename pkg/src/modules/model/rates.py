import math
from dataclasses import dataclass
from typing import Literal, Tuple, get_args

import numpy as np

from src.modules.errors import ModelConfigError, RateDomainError
from src.typings.nmqj import RateDetails

RateKind = Literal["constant", "piecewise-constant", "damped-cosine", "cosine", "table-lookup"]
RATE_KINDS: Tuple[str, ...] = get_args(RateKind)
# relative tolerance at the ends of a tabulated range
RANGE_TOL = 1e-9


@dataclass(frozen=True)
class RatePartition:
    """Positive and negative parts of a decay rate, `delta = plus - minus` with `plus * minus == 0`."""

    plus: float
    minus: float


def rate_partition(delta: float) -> RatePartition:
    """Splits a decay rate into its positive and negative parts.

    Parameters
    ----------
        * delta: :class:`float`
            - The signed decay rate. Must be finite.
    """
    if not math.isfinite(delta):
        raise ValueError(f"Decay rate must be finite, got {delta!r}")
    return RatePartition(plus=max(delta, 0.0), minus=max(-delta, 0.0))


@dataclass(frozen=True)
class RateFunction:
    """A real-valued decay rate Delta(t).

    Parameter layouts per kind
    ----------
        * constant: `[A]`
        * cosine: `[A, omega]` -> A cos(omega t)
        * damped-cosine: `[A, kappa, omega]` -> A exp(-kappa t) cos(omega t)
        * piecewise-constant: `[t0, v0, t1, v1, ..., t_end]` -> v_i on [t_i, t_{i+1}), the last value also at t_end
        * table-lookup: `[t0, v0, t1, v1, ...]` -> linear interpolation between the points
    """

    kind: RateKind
    params: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        validate_rate(self)

    def __call__(self, t: float) -> float:
        return eval_rate(self, t)

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        """The time breakpoints of the tabulated kinds, empty for the analytic ones."""
        if self.kind in ("piecewise-constant", "table-lookup"):
            return self.params[0::2]
        return ()

    def render(self) -> RateDetails:
        return {"kind": self.kind, "params": list(self.params)}

    @classmethod
    def constant(cls, value: float):
        return cls("constant", (value,))

    @classmethod
    def cosine(cls, amplitude: float, omega: float):
        return cls("cosine", (amplitude, omega))

    @classmethod
    def damped_cosine(cls, amplitude: float, kappa: float, omega: float):
        return cls("damped-cosine", (amplitude, kappa, omega))

    @classmethod
    def piecewise(cls, breakpoints, values):
        """Builds a piecewise-constant rate from `n + 1` breakpoints and `n` values."""
        if len(breakpoints) != len(values) + 1:
            raise ModelConfigError("piecewise-constant rate needs one more breakpoint than values", "rate.params")
        params = []
        for t_i, v_i in zip(breakpoints, values):
            params.extend([t_i, v_i])
        params.append(breakpoints[-1])
        return cls("piecewise-constant", tuple(params))

    @classmethod
    def table(cls, times, values):
        params = []
        for t_i, v_i in zip(times, values):
            params.extend([t_i, v_i])
        return cls("table-lookup", tuple(params))


_PARAM_COUNTS = {"constant": 1, "cosine": 2, "damped-cosine": 3}


def validate_rate(rate: RateFunction, field: str = "rate"):
    """Checks the parameter layout of a rate function. Raises `ModelConfigError` on violation."""
    if rate.kind not in RATE_KINDS:
        raise ModelConfigError(f"unknown rate kind '{rate.kind}', expected one of {', '.join(RATE_KINDS)}", field)

    params = rate.params
    if not all(math.isfinite(p) for p in params):
        raise ModelConfigError("rate parameters must be finite", f"{field}.params")

    if rate.kind in _PARAM_COUNTS:
        if len(params) != _PARAM_COUNTS[rate.kind]:
            raise ModelConfigError(
                f"'{rate.kind}' rate takes {_PARAM_COUNTS[rate.kind]} parameters, got {len(params)}", f"{field}.params"
            )
        return

    if rate.kind == "piecewise-constant":
        if len(params) < 3 or len(params) % 2 == 0:
            raise ModelConfigError(
                "piecewise-constant rate takes [t0, v0, t1, v1, ..., t_end] (odd length >= 3)", f"{field}.params"
            )
    elif len(params) < 4 or len(params) % 2 == 1:
        raise ModelConfigError("table-lookup rate takes at least two [t, value] pairs", f"{field}.params")

    times = params[0::2]
    if any(later <= earlier for earlier, later in zip(times, times[1:])):
        raise ModelConfigError("rate breakpoints must be strictly increasing", f"{field}.params")


def eval_rate(rate: RateFunction, t: float) -> float:
    """Evaluates Delta(t).

    Parameters
    ----------
        * rate: :class:`RateFunction`
        * t: :class:`float`
            - The time to evaluate at. Tabulated kinds raise `RateDomainError` outside their breakpoints.
    """
    params = rate.params

    if rate.kind == "constant":
        return params[0]

    if rate.kind == "cosine":
        amplitude, omega = params
        return amplitude * math.cos(omega * t)

    if rate.kind == "damped-cosine":
        amplitude, kappa, omega = params
        return amplitude * math.exp(-kappa * t) * math.cos(omega * t)

    times = params[0::2]
    # grid times n * dt may land a few ulps past an end breakpoint
    slack = RANGE_TOL * max(1.0, abs(times[0]), abs(times[-1]))
    if t < times[0] - slack or t > times[-1] + slack:
        raise RateDomainError(t, times[0], times[-1])
    t = min(max(t, times[0]), times[-1])

    if rate.kind == "piecewise-constant":
        values = params[1::2]
        # bisect on the inner breakpoints; t == t_end keeps the last value
        idx = int(np.searchsorted(times[1:-1], t, side="right"))
        return values[idx]

    values = params[1::2]
    return float(np.interp(t, times, values))
