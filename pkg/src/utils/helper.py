import json
from functools import reduce
from pathlib import Path
from typing import Any, Dict


def get_from_dict(dic, map_list):
    """Iterate nested dictionary. Returns `None` if not key is not found."""
    try:
        return reduce(dict.get, map_list, dic)
    except TypeError:
        return None


def dict_has_key(dic, key):
    """Whether or not a dictionary has a given key. Returns `True` or `False`"""
    return key in dic.keys()


def format_float(value: float) -> str:
    """Renders a float with 17 significant digits, enough for a lossless round-trip."""
    return format(float(value), ".17g")


def save_json(path: Path, obj: Dict[str, Any]):
    """Writes an object as indented, key-sorted JSON.

    Parameters
    ----------
        * path: :class:`Path`
        * obj: Dict[:class:`str`, Any]
    """
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def load_json(path: Path) -> Dict[str, Any]:
    with open(path, "r") as json_file:
        return json.load(json_file)
