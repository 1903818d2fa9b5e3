import argparse
import logging
from pathlib import Path
from typing import List

from src.modules.errors import GridMismatchError
from src.modules.output.compare import compare_runs
from src.nmqj import EXIT_COMPARE_FAIL, EXIT_OK, EXIT_USAGE, CommandGroup
from src.utils.helper import save_json

REPORT_FILE = "report.json"


class Compare(CommandGroup):
    name = "compare"

    def register(self, subparsers: argparse._SubParsersAction):
        parser = subparsers.add_parser(
            "compare", help="check two runs of the same model against each other on their common time grid"
        )
        parser.add_argument("run_a", type=Path, help="first run directory")
        parser.add_argument("run_b", type=Path, help="second run directory")
        parser.add_argument("--atol", type=float, default=0.0, help="absolute tolerance per density element")
        parser.add_argument(
            "--k", type=float, default=4.0, help="tolerated multiple of the Monte Carlo standard error"
        )
        parser.add_argument("--out", type=Path, help=f"report path (default: <run_a>/{REPORT_FILE})")
        parser.add_argument("--verbose", "-v", action="store_true", default=argparse.SUPPRESS)
        parser.set_defaults(handler=self.compare)

    def compare(self, args: argparse.Namespace, extra: List[str]) -> int:
        try:
            report = compare_runs(args.run_a, args.run_b, args.atol, args.k)
        except (GridMismatchError, FileNotFoundError) as e:
            logging.error(f"Cannot compare {args.run_a} with {args.run_b}: {e}")
            return EXIT_USAGE

        out: Path = args.out or args.run_a / REPORT_FILE
        save_json(out, report)
        worst = report["worst"]
        print(
            f"{'PASS' if report['passed'] else 'FAIL'}: worst {worst['element']} at t={worst['t']:.6g} "
            f"differs by {worst['difference']:.3e} (allowed {worst['allowed']:.3e})"
        )
        return EXIT_OK if report["passed"] else EXIT_COMPARE_FAIL


def setup(app):
    app.add_group(Compare(app))
