import math
from typing import Callable, Dict, List, Optional

import numpy as np

from src.modules.errors import ModelConfigError
from src.modules.model.model import Channel, ModelSpec
from src.modules.model.operators import EXCITED, SIGMA_MINUS, SIGMA_Z
from src.modules.model.rates import RateFunction
from src.utils.config import PresetsConfig, parse_number

ZERO_HAMILTONIAN = np.zeros((2, 2), dtype=np.complex128)


def markov_decay(gamma: float) -> ModelSpec:
    return ModelSpec(
        hamiltonian=ZERO_HAMILTONIAN,
        channels=(Channel("decay", SIGMA_MINUS, RateFunction.constant(gamma)),),
        initial_state=EXCITED,
        name="markov-decay",
    )


def oscillating_decay(delta0: float, omega: float) -> ModelSpec:
    return ModelSpec(
        hamiltonian=ZERO_HAMILTONIAN,
        channels=(Channel("decay", SIGMA_MINUS, RateFunction.cosine(delta0, omega)),),
        initial_state=EXCITED,
        name="oscillating-decay",
    )


def two_channel(gamma: float, dephasing: float, kappa: float, omega: float) -> ModelSpec:
    return ModelSpec(
        hamiltonian=ZERO_HAMILTONIAN,
        channels=(
            Channel("decay", SIGMA_MINUS, RateFunction.constant(gamma)),
            Channel("dephasing", SIGMA_Z, RateFunction.damped_cosine(dephasing, kappa, omega)),
        ),
        initial_state=np.array([1.0, 1.0], dtype=np.complex128) / math.sqrt(2.0),
        name="two-channel",
    )


def breakdown_toy(gamma: float, t_on: float, t_end: float) -> ModelSpec:
    # Nothing populates |g> before t_on, so the first reverse jump has an empty source ray
    return ModelSpec(
        hamiltonian=ZERO_HAMILTONIAN,
        channels=(Channel("decay", SIGMA_MINUS, RateFunction.piecewise([0.0, t_on, t_end], [0.0, -gamma])),),
        initial_state=EXCITED,
        name="breakdown-toy",
    )


PRESETS: Dict[str, Callable[..., ModelSpec]] = {
    "markov-decay": markov_decay,
    "oscillating-decay": oscillating_decay,
    "two-channel": two_channel,
    "breakdown-toy": breakdown_toy,
}


def preset_names() -> List[str]:
    return list(PRESETS.keys())


def _preset_number(value, field: str) -> float:
    """Reads one preset parameter: a JSON number or a string such as `2pi`."""
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ModelConfigError(f"preset parameters must be numbers, got {value!r}", field)
    try:
        number = parse_number(value)
    except ValueError as e:
        raise ModelConfigError(f"preset parameter {value!r} is not a number", field) from e
    if not math.isfinite(number):
        raise ModelConfigError(f"preset parameters must be finite, got {value!r}", field)
    return number


def build_preset(name: str, params: Optional[Dict[str, float]] = None) -> ModelSpec:
    """Expands a preset name into a `ModelSpec`.

    Parameters
    ----------
        * name: :class:`str`
            - One of `markov-decay`, `oscillating-decay`, `two-channel`, `breakdown-toy`.
        * params: Optional[Dict[:class:`str`, :class:`float`]] | None
            - Overrides of the defaults stored in `presets.yaml`.
    """
    if name not in PRESETS:
        raise ModelConfigError(f"unknown preset '{name}', expected one of {', '.join(PRESETS)}", "preset")

    merged = PresetsConfig().get_params(name)
    for key, value in (params or {}).items():
        if key not in merged:
            raise ModelConfigError(
                f"preset '{name}' has no parameter '{key}' (known: {', '.join(merged)})", f"params.{key}"
            )
        merged[key] = _preset_number(value, f"params.{key}")

    return PRESETS[name](**merged)
