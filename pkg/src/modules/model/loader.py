import json
from pathlib import Path
from typing import Any, List

import numpy as np

from src.modules.errors import ModelConfigError
from src.modules.model.model import Channel, ModelSpec
from src.modules.model.presets import build_preset
from src.modules.model.rates import RateFunction
from src.typings.nmqj import ModelDetails
from src.utils.helper import dict_has_key

EXPLICIT_FIELDS = ("dim", "hamiltonian", "channels", "initial_state")


def _parse_scalar(value: Any, field: str) -> complex:
    """A scalar is either a real number or a `[re, im]` pair."""
    if isinstance(value, bool):
        raise ModelConfigError("expected a number or a [re, im] pair, got a boolean", field)
    if isinstance(value, (int, float)):
        return complex(float(value), 0.0)
    if isinstance(value, list) and len(value) == 2 and all(
        isinstance(part, (int, float)) and not isinstance(part, bool) for part in value
    ):
        return complex(float(value[0]), float(value[1]))
    raise ModelConfigError(f"expected a number or a [re, im] pair, got {value!r}", field)


def _parse_vector(value: Any, dim: int, field: str) -> np.ndarray:
    if not isinstance(value, list) or len(value) != dim:
        raise ModelConfigError(f"expected a list of {dim} amplitudes", field)
    return np.array([_parse_scalar(item, f"{field}[{idx}]") for idx, item in enumerate(value)], dtype=np.complex128)


def _parse_matrix(value: Any, dim: int, field: str) -> np.ndarray:
    if not isinstance(value, list) or len(value) != dim:
        found = len(value) if isinstance(value, list) else "no"
        raise ModelConfigError(f"Dimension mismatch: expected a {dim}x{dim} matrix, got {found} rows", field)
    rows = []
    for row_idx, row in enumerate(value):
        if not isinstance(row, list) or len(row) != dim:
            raise ModelConfigError(
                f"Dimension mismatch: row {row_idx} must have {dim} entries", f"{field}[{row_idx}]"
            )
        rows.append([_parse_scalar(item, f"{field}[{row_idx}][{col_idx}]") for col_idx, item in enumerate(row)])
    return np.array(rows, dtype=np.complex128)


def _parse_rate(value: Any, field: str) -> RateFunction:
    if not isinstance(value, dict) or not dict_has_key(value, "kind"):
        raise ModelConfigError("a rate needs a 'kind' and a 'params' list", field)
    params = value.get("params", [])
    if not isinstance(params, list) or not all(
        isinstance(p, (int, float)) and not isinstance(p, bool) for p in params
    ):
        raise ModelConfigError("rate params must be a list of numbers", f"{field}.params")
    try:
        return RateFunction(kind=value["kind"], params=tuple(params))
    except ModelConfigError as e:
        suffix = e.field[len("rate") :] if e.field else ""
        raise ModelConfigError(e.message, f"{field}{suffix}") from e


def _parse_channels(value: Any, dim: int) -> List[Channel]:
    if not isinstance(value, list):
        raise ModelConfigError("channels must be a list", "channels")
    channels = []
    for idx, entry in enumerate(value):
        field = f"channels[{idx}]"
        if not isinstance(entry, dict):
            raise ModelConfigError("a channel must be an object with label, operator and rate", field)
        for key in ("operator", "rate"):
            if not dict_has_key(entry, key):
                raise ModelConfigError(f"missing '{key}'", f"{field}.{key}")
        channels.append(
            Channel(
                label=str(entry.get("label", f"c{idx}")),
                operator=_parse_matrix(entry["operator"], dim, f"{field}.operator"),
                rate=_parse_rate(entry["rate"], f"{field}.rate"),
            )
        )
    return channels


def _parse_observables(value: Any, dim: int) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ModelConfigError("observables must map names to matrices", "observables")
    return {str(name): _parse_matrix(matrix, dim, f"observables.{name}") for name, matrix in value.items()}


def load_model(config_text: str) -> ModelSpec:
    """Parses and validates a model configuration (JSON text).

    Either names a preset (`{"preset": ..., "params": {...}}`) or spells out the model
    (`dim`, `hamiltonian`, `channels`, `initial_state`); mixing the two is an error.

    Parameters
    ----------
        * config_text: :class:`str`

    Raises
    ----------
        * :class:`ModelConfigError`
            - On malformed JSON (with line and column), schema violations (with the field path) and model invariant
              violations such as a non-Hermitian Hamiltonian or an unnormalized initial state.
    """
    try:
        data: ModelDetails = json.loads(config_text)
    except json.JSONDecodeError as e:
        raise ModelConfigError(f"invalid JSON: {e.msg}", line=e.lineno, column=e.colno) from e

    if not isinstance(data, dict):
        raise ModelConfigError("the model configuration must be a JSON object")

    if dict_has_key(data, "preset"):
        explicit = [key for key in EXPLICIT_FIELDS if dict_has_key(data, key)]
        if explicit:
            raise ModelConfigError(f"'preset' cannot be combined with explicit fields {explicit}", "preset")
        params = data.get("params") or {}
        if not isinstance(params, dict):
            raise ModelConfigError("preset params must be an object", "params")
        model = build_preset(str(data["preset"]), params)
        if dict_has_key(data, "observables"):
            model = ModelSpec(
                hamiltonian=model.hamiltonian,
                channels=model.channels,
                initial_state=model.initial_state,
                observables=_parse_observables(data["observables"], model.dim),
                name=model.name,
            )
        return model

    for key in EXPLICIT_FIELDS:
        if not dict_has_key(data, key):
            raise ModelConfigError(f"missing required field '{key}'", key)

    dim = data["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ModelConfigError("dim must be a positive integer", "dim")

    return ModelSpec(
        hamiltonian=_parse_matrix(data["hamiltonian"], dim, "hamiltonian"),
        channels=tuple(_parse_channels(data["channels"], dim)),
        initial_state=_parse_vector(data["initial_state"], dim, "initial_state"),
        observables=_parse_observables(data.get("observables"), dim),
    )


def load_model_file(path: Path) -> ModelSpec:
    with open(path, "r") as model_file:
        return load_model(model_file.read())


def _render_matrix(matrix: np.ndarray) -> list:
    return [[[float(entry.real), float(entry.imag)] for entry in row] for row in matrix]


def render_model(model: ModelSpec) -> str:
    """Renders a model as explicit JSON that `load_model` reads back into an identical `ModelSpec`."""
    details: ModelDetails = {
        "dim": model.dim,
        "hamiltonian": _render_matrix(model.hamiltonian),
        "channels": [
            {"label": channel.label, "operator": _render_matrix(channel.operator), "rate": channel.rate.render()}
            for channel in model.channels
        ],
        "initial_state": [[float(amp.real), float(amp.imag)] for amp in model.initial_state],
    }
    if model.observables:
        details["observables"] = {name: _render_matrix(matrix) for name, matrix in model.observables.items()}
    return json.dumps(details, indent=2) + "\n"
