import argparse
import logging
import time
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from src.modules.errors import (
    ModelConfigError,
    PositivityBreakdown,
    PropagationError,
    RaySetOverflow,
    TimestepTooLarge,
)
from src.modules.linalg.core import projector
from src.modules.model.loader import load_model_file
from src.modules.model.model import ModelSpec
from src.modules.model.presets import PRESETS, build_preset
from src.modules.oracle.lindblad import integrate_rk4
from src.modules.oracle.pint import integrate_pint
from src.modules.output.writer import (
    JUMPS_FILE,
    META_FILE,
    SIGMA_FILE,
    TIMESERIES_FILE,
    write_jumps,
    write_meta,
    write_sigma,
    write_timeseries,
)
from src.modules.runner.observables import resolve_observables
from src.modules.runner.runner import NMQJRunner, RunConfig
from src.nmqj import EXIT_BREAKDOWN, EXIT_OK, EXIT_TIMESTEP, EXIT_USAGE, CommandGroup, __version__
from src.typings.nmqj import RunRecord
from src.utils.config import SimulationConfig

METHODS = ("nmqj", "rk4", "pint")


def load_model_argument(value: str) -> ModelSpec:
    """Loads `--model`: a model JSON file, or the name of a preset with its default parameters."""
    path = Path(value)
    if path.exists():
        return load_model_file(path)
    if value in PRESETS:
        return build_preset(value)
    raise ModelConfigError(f"model file '{value}' does not exist and is not a preset name", "model")


class Run(CommandGroup):
    name = "run"

    def register(self, subparsers: argparse._SubParsersAction):
        parser = subparsers.add_parser("run", help="simulate a model and write timeseries.csv and meta.json")
        parser.add_argument("method", choices=METHODS, help="nmqj jump ensemble, rk4 master equation or pint weights")
        parser.add_argument("--model", required=True, help="model JSON file (or a preset name)")
        parser.add_argument("--n", type=int, help="ensemble size N")
        parser.add_argument("--dt", type=float, help="time step")
        parser.add_argument("--t", type=float, dest="t_final", help="final time")
        parser.add_argument("--seed", type=int, help="master seed of the jump sampling")
        parser.add_argument("--stride", type=int, help="record every STRIDE steps")
        parser.add_argument("--out", type=Path, help="output directory")
        parser.add_argument(
            "--observable",
            action="append",
            dest="observables",
            metavar="NAME",
            help="pop<i>, sx, sy, sz or an observable of the model file (repeatable)",
        )
        parser.add_argument("--workers", type=int, help="threads propagating the rays")
        parser.add_argument("--propagator", choices=("rk4", "first-order"), help="drift integration scheme")
        parser.add_argument("--ray-tol", type=float, dest="ray_tolerance", help="ray-equivalence tolerance")
        parser.add_argument("--p-max", type=float, dest="p_max", help="largest per-ray jump probability per step")
        parser.add_argument("--max-rays", type=int, dest="max_rays", help="ray cap of the pint integrator")
        parser.add_argument("--verbose", "-v", action="store_true", default=argparse.SUPPRESS)
        parser.set_defaults(handler=self.run)

    def run(self, args: argparse.Namespace, extra: List[str]) -> int:
        config = SimulationConfig()
        model = load_model_argument(args.model)
        try:
            cfg = RunConfig.from_config(
                config,
                dt=args.dt,
                t_final=args.t_final,
                ensemble_size=args.n,
                seed=args.seed,
                record_stride=args.stride,
                ray_tolerance=args.ray_tolerance,
                p_max=args.p_max,
                workers=args.workers,
                method=args.propagator,
            )
        except ValueError as e:
            logging.error(f"Invalid run settings: {e}")
            return EXIT_USAGE

        names = args.observables or config.observables or default_observables(model)
        observables = resolve_observables(names, model)
        max_rays = args.max_rays or config.max_rays

        digest = model.digest()
        run_id = f"{args.method}-{digest[:10]}-{time.strftime('%Y%m%d-%H%M%S')}"
        out_dir: Path = args.out or config.output_dir / run_id
        out_dir.mkdir(parents=True, exist_ok=True)
        logging.info(f"Running {args.method} on model {digest[:10]} into {out_dir}")

        started = time.perf_counter()
        outputs: Dict[str, str] = {}
        failure: Optional[dict] = None
        status, exit_code = "ok", EXIT_OK

        if args.method == "nmqj":
            runner = NMQJRunner(model, cfg)
            try:
                runner.run()
            except PositivityBreakdown as e:
                status, exit_code, failure = "breakdown", EXIT_BREAKDOWN, e.to_record()
            except TimestepTooLarge as e:
                status, exit_code, failure = "timestep", EXIT_TIMESTEP, e.to_record()
            except PropagationError as e:
                status, exit_code, failure = "propagation", EXIT_USAGE, {"error": "PropagationError", "message": str(e)}
                logging.error(str(e))
            outputs["timeseries"] = write_timeseries(out_dir / TIMESERIES_FILE, runner.snapshots, observables).name
            outputs["sigma"] = write_sigma(out_dir / SIGMA_FILE, runner.snapshots).name
            outputs["jumps"] = write_jumps(out_dir / JUMPS_FILE, runner.jump_log).name
        else:
            records, status, exit_code, failure = self._deterministic(args.method, model, cfg, max_rays)
            if records is not None:
                outputs["timeseries"] = write_timeseries(out_dir / TIMESERIES_FILE, records, observables).name

        settings = cfg.as_dict()
        if args.method != "nmqj":
            for key in ("ensemble_size", "seed", "ray_tolerance", "p_max", "workers"):
                settings.pop(key)
        if args.method == "pint":
            settings["max_rays"] = max_rays
        settings["observables"] = list(observables)
        settings["model"] = str(args.model)

        record: RunRecord = {
            "run_id": run_id,
            "method": args.method,
            "model_digest": digest,
            "config": settings,
            "seed": cfg.seed if args.method == "nmqj" else None,
            "version": __version__,
            "wall_time": time.perf_counter() - started,
            "status": status,
            "exit_code": exit_code,
            "outputs": outputs,
        }
        if failure is not None:
            record["failure"] = failure
        write_meta(out_dir / META_FILE, record)

        logging.info(f"Run {run_id} finished with status '{status}' in {record['wall_time']:.2f}s")
        return exit_code

    @staticmethod
    def _deterministic(method: str, model: ModelSpec, cfg: RunConfig, max_rays: int) -> Tuple:
        if method == "rk4":
            records = integrate_rk4(model, projector(model.initial_state), cfg.dt, cfg.t_final, cfg.record_stride)
            return records, "ok", EXIT_OK, None
        try:
            records = integrate_pint(model, cfg.dt, cfg.t_final, cfg.record_stride, max_rays, cfg.propagator)
        except RaySetOverflow as e:
            logging.error(str(e))
            return None, "overflow", EXIT_USAGE, {"error": "RaySetOverflow", "message": str(e), "cap": e.cap}
        return records, "ok", EXIT_OK, None


def default_observables(model: ModelSpec) -> List[str]:
    """Every level population, then the observables defined in the model file."""
    return [f"pop{i}" for i in range(model.dim)] + list(model.observables)


def setup(app):
    app.add_group(Run(app))
