import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Protocol, Sequence

import numpy as np

from src.modules.linalg.core import DensityMatrix, LinearOperator, min_eigenvalue
from src.modules.runner.runner import EnsembleSnapshot, JumpLogEntry
from src.typings.nmqj import RunRecord
from src.utils.helper import format_float, load_json, save_json

TIMESERIES_FILE = "timeseries.csv"
SIGMA_FILE = "sigma.csv"
JUMPS_FILE = "jumps.csv"
META_FILE = "meta.json"


class DensityPoint(Protocol):
    step: int
    t: float
    density: DensityMatrix

    @property
    def ray_count(self) -> int: ...


def _element_names(dim: int) -> List[str]:
    separator = "" if dim <= 10 else "_"
    return [f"{i}{separator}{j}" for i in range(dim) for j in range(dim)]


def timeseries_header(dim: int, observable_names: Sequence[str]) -> List[str]:
    """`t, step, rho_<i><j>_re, rho_<i><j>_im, ..., trace, min_eigenvalue, ray_count, <observables>`"""
    header = ["t", "step"]
    for element in _element_names(dim):
        header.extend([f"rho_{element}_re", f"rho_{element}_im"])
    header.extend(["trace", "min_eigenvalue", "ray_count"])
    header.extend(observable_names)
    return header


def write_timeseries(path: Path, records: Sequence[DensityPoint], observables: Dict[str, LinearOperator]) -> Path:
    """Writes one CSV row per recorded time. Every float is rendered with 17 significant digits.

    Parameters
    ----------
        * path: :class:`Path`
        * records: Sequence[:class:`DensityPoint`]
            - `EnsembleSnapshot` or `DensityRecord` entries in time order.
        * observables: Dict[:class:`str`, :class:`LinearOperator`]
            - Observables whose averages tr(A rho) get a column each.
    """
    dim = records[0].density.shape[0] if records else 0
    with open(path, "w", newline="") as csv_file:
        writer = csv.writer(csv_file, lineterminator="\n")
        writer.writerow(timeseries_header(dim, list(observables)))
        for record in records:
            rho = record.density
            row = [format_float(record.t), str(record.step)]
            for entry in rho.reshape(-1):
                row.extend([format_float(entry.real), format_float(entry.imag)])
            row.append(format_float(np.trace(rho).real))
            row.append(format_float(min_eigenvalue(rho)))
            row.append(str(record.ray_count))
            row.extend(format_float(np.trace(matrix @ rho).real) for matrix in observables.values())
            writer.writerow(row)
    return path


def write_sigma(path: Path, snapshots: Sequence[EnsembleSnapshot]) -> Path:
    """Writes the Monte Carlo standard error of every density element: `t, step, sigma_<i><j>, ...`."""
    dim = snapshots[0].density.shape[0] if snapshots else 0
    with open(path, "w", newline="") as csv_file:
        writer = csv.writer(csv_file, lineterminator="\n")
        writer.writerow(["t", "step"] + [f"sigma_{element}" for element in _element_names(dim)])
        for snapshot in snapshots:
            writer.writerow(
                [format_float(snapshot.t), str(snapshot.step)]
                + [format_float(value) for value in snapshot.sigma.reshape(-1)]
            )
    return path


def write_jumps(path: Path, jump_log: Sequence[JumpLogEntry]) -> Path:
    with open(path, "w", newline="") as csv_file:
        writer = csv.writer(csv_file, lineterminator="\n")
        writer.writerow(["step", "t", "channel", "direction", "proposals", "transfers"])
        for entry in jump_log:
            writer.writerow(
                [
                    entry.step,
                    format_float(entry.t),
                    entry.channel,
                    entry.direction.value,
                    entry.proposals,
                    entry.transfers,
                ]
            )
    return path


def write_meta(path: Path, record: RunRecord) -> Path:
    save_json(path, record)
    return path


def read_meta(run_dir: Path) -> RunRecord:
    return load_json(run_dir / META_FILE)


@dataclass(frozen=True)
class TimeSeries:
    """The density part of a `timeseries.csv` (or the matrix part of a `sigma.csv`)."""

    t: np.ndarray
    steps: np.ndarray
    matrices: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]


def read_timeseries(path: Path) -> TimeSeries:
    with open(path, "r", newline="") as csv_file:
        rows = list(csv.reader(csv_file))
    header, body = rows[0], rows[1:]
    n_elements = sum(1 for name in header if name.startswith("rho_") and name.endswith("_re"))
    dim = math.isqrt(n_elements)
    values = np.array([[float(cell) for cell in row[2 : 2 + 2 * n_elements]] for row in body], dtype=np.float64)
    values = values.reshape(len(body), 2 * n_elements)
    matrices = (values[:, 0::2] + 1j * values[:, 1::2]).reshape(len(body), dim, dim)
    return TimeSeries(
        t=np.array([float(row[0]) for row in body]),
        steps=np.array([int(row[1]) for row in body]),
        matrices=matrices,
    )


def read_sigma(path: Path) -> Optional[TimeSeries]:
    """Reads a `sigma.csv`; returns `None` for runs that have none (deterministic methods)."""
    if not path.exists():
        return None
    with open(path, "r", newline="") as csv_file:
        rows = list(csv.reader(csv_file))
    header, body = rows[0], rows[1:]
    n_elements = len(header) - 2
    dim = math.isqrt(n_elements)
    values = np.array([[float(cell) for cell in row[2:]] for row in body], dtype=np.float64)
    return TimeSeries(
        t=np.array([float(row[0]) for row in body]),
        steps=np.array([int(row[1]) for row in body]),
        matrices=values.reshape(len(body), dim, dim),
    )
