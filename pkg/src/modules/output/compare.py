import logging
from pathlib import Path

import numpy as np

from src.modules.errors import GridMismatchError
from src.modules.output.writer import SIGMA_FILE, TIMESERIES_FILE, read_meta, read_sigma, read_timeseries
from src.typings.nmqj import CompareReport

GRID_TOL = 1e-12


def compare_runs(run_a: Path, run_b: Path, atol: float, k: float) -> CompareReport:
    """Compares the density time series of two run directories element by element.

    An element passes when |rho_a - rho_b| <= atol + k sigma, with sigma the Monte Carlo standard error of the
    stochastic run(s) (zero for two deterministic runs).

    Parameters
    ----------
        * run_a: :class:`Path`
        * run_b: :class:`Path`
        * atol: :class:`float`
        * k: :class:`float`
            - Multiple of the Monte Carlo standard error that is tolerated.

    Raises
    ----------
        * :class:`GridMismatchError`
            - If the runs simulate different models or were recorded on different time grids.
    """
    meta_a, meta_b = read_meta(run_a), read_meta(run_b)
    if meta_a["model_digest"] != meta_b["model_digest"]:
        raise GridMismatchError(
            f"runs simulate different models ({meta_a['model_digest'][:12]} vs {meta_b['model_digest'][:12]})"
        )

    series_a = read_timeseries(run_a / TIMESERIES_FILE)
    series_b = read_timeseries(run_b / TIMESERIES_FILE)
    if series_a.t.shape != series_b.t.shape or series_a.dim != series_b.dim:
        raise GridMismatchError(
            f"recorded grids differ: {series_a.t.shape[0]} points of dim {series_a.dim} vs "
            f"{series_b.t.shape[0]} points of dim {series_b.dim}"
        )
    if series_a.t.size == 0:
        raise GridMismatchError("the runs recorded no time points")
    offset = float(np.max(np.abs(series_a.t - series_b.t)))
    if offset > GRID_TOL:
        raise GridMismatchError(f"recorded times differ by up to {offset!r}")

    variance = np.zeros(series_a.matrices.shape, dtype=np.float64)
    for sigma in (read_sigma(run_a / SIGMA_FILE), read_sigma(run_b / SIGMA_FILE)):
        if sigma is not None:
            variance += sigma.matrices**2
    allowed = atol + k * np.sqrt(variance)

    difference = np.abs(series_a.matrices - series_b.matrices)
    excess = difference - allowed
    worst_point, worst_i, worst_j = np.unravel_index(int(np.argmax(excess)), excess.shape)
    passed = bool(np.all(excess <= 0.0))

    report: CompareReport = {
        "run_a": str(run_a),
        "run_b": str(run_b),
        "model_digest": meta_a["model_digest"],
        "atol": atol,
        "k": k,
        "passed": passed,
        "max_difference": [float(value) for value in difference.reshape(difference.shape[0], -1).max(axis=1)],
        "worst": {
            "t": float(series_a.t[worst_point]),
            "step": int(series_a.steps[worst_point]),
            "element": f"rho_{worst_i}{worst_j}",
            "difference": float(difference[worst_point, worst_i, worst_j]),
            "allowed": float(allowed[worst_point, worst_i, worst_j]),
        },
    }
    logging.info(
        f"Compared {run_a} with {run_b}: {'PASS' if passed else 'FAIL'} "
        f"(worst {report['worst']['element']} at t={report['worst']['t']!r})"
    )
    return report
