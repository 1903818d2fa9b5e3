import math
import os
from pathlib import Path
from typing import Any, Dict, List, Optional

from ruamel.yaml import YAML

from src.utils.helper import dict_has_key, get_from_dict

yaml = YAML(typ="safe")

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


class SimulationConfig:
    """The SimulationConfig class helps load the `simulation.yaml` file and exposes the default run, propagator and jump-engine settings.

    Environment overrides (read after `load_dotenv`)
    ----------
        * NMQJ_WORKERS
            - Thread count for per-ray propagation.
        * NMQJ_OUTPUT_DIR
            - Default output root for `run`.
    """

    def __init__(self, path: Optional[Path] = None) -> None:
        with open(path or DATA_DIR / "simulation.yaml", "r") as simulation_file:
            self._data = yaml.load(simulation_file)

    @property
    def run_defaults(self) -> Dict[str, Any]:
        """Get the default `RunConfig` fields."""
        return dict(get_from_dict(self._data, ["run"]) or {})

    @property
    def propagator_defaults(self) -> Dict[str, Any]:
        """Get the default `PropagatorConfig` fields."""
        return dict(get_from_dict(self._data, ["propagator"]) or {})

    @property
    def p_max(self) -> float:
        """Get the largest per-ray jump probability allowed in one step."""
        return float(get_from_dict(self._data, ["engine", "p_max"]))

    @property
    def max_rays(self) -> int:
        """Get the ray cap of the quasi-probability integrator."""
        return int(get_from_dict(self._data, ["pint", "max_rays"]))

    @property
    def workers(self) -> int:
        """Get the number of propagation threads. `NMQJ_WORKERS` takes precedence over the YAML value."""
        env_workers = os.getenv("NMQJ_WORKERS")
        if env_workers:
            return max(1, int(env_workers))
        return max(1, int(get_from_dict(self._data, ["engine", "workers"]) or 1))

    @property
    def output_dir(self) -> Path:
        """Get the default output root."""
        return Path(os.getenv("NMQJ_OUTPUT_DIR") or get_from_dict(self._data, ["output", "root"]) or "runs")

    @property
    def observables(self) -> List[str]:
        """Get the observables recorded when none are requested on the command line."""
        return list(get_from_dict(self._data, ["output", "observables"]) or [])


class PresetsConfig:
    """The PresetsConfig class helps load the `presets.yaml` file and provides the default parameters of every preset model."""

    def __init__(self, path: Optional[Path] = None) -> None:
        with open(path or DATA_DIR / "presets.yaml", "r") as presets_file:
            self._data = yaml.load(presets_file)

    @property
    def names(self) -> List[str]:
        """Get the preset names in file order."""
        return list(get_from_dict(self._data, ["presets"]).keys())

    def has_preset(self, name: str) -> bool:
        return dict_has_key(get_from_dict(self._data, ["presets"]), name)

    def get_description(self, name: str) -> str:
        return get_from_dict(self._data, ["presets", name, "description"]) or ""

    def get_params(self, name: str) -> Dict[str, float]:
        """Get the default parameters of a preset. Strings such as `2pi` are expanded to floats."""
        params = get_from_dict(self._data, ["presets", name, "params"]) or {}
        return {key: parse_number(value) for key, value in params.items()}


def parse_number(value: Any) -> float:
    """Parses a YAML or command-line number, accepting multiples of pi written as `2pi` or `0.5*pi`."""
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip().lower().replace("*", "").replace(" ", "")
    if text.endswith("pi"):
        factor = text[:-2]
        return (float(factor) if factor else 1.0) * math.pi
    return float(text)
