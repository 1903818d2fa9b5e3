import argparse
import importlib
import logging
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional

from src.modules.errors import NMQJError

__version__ = "0.1.0"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BREAKDOWN = 2
EXIT_TIMESTEP = 3
EXIT_COMPARE_FAIL = 4


class ArgumentParser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with `EXIT_USAGE` instead of 2, which means positivity breakdown here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class CommandGroup:
    """Base class of the command groups living in `src/commands/<name>/<name>.py`.

    Subclasses add their subcommands in `register` and point each one at a handler through
    `parser.set_defaults(handler=...)`. A handler receives the parsed namespace and the unparsed extra arguments, and
    returns the exit code.
    """

    name: str = ""

    def __init__(self, app: "NMQJ"):
        self.app = app

    def register(self, subparsers: argparse._SubParsersAction):
        raise NotImplementedError


class NMQJ:
    def __init__(self):
        self.commands_path = Path(__file__).resolve().parent / "commands"
        self.commands_ext_prefix = "src.commands."
        self.groups: Dict[str, CommandGroup] = {}
        self.parser = ArgumentParser(
            prog="nmqj", description="Non-Markovian quantum jump simulations and their deterministic references."
        )
        self.parser.add_argument("--verbose", "-v", action="store_true", help="log every step at DEBUG level")
        self.parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
        self.subparsers = self.parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)
        self._loaded = False

    def add_group(self, group: CommandGroup):
        self.groups[group.name] = group
        group.register(self.subparsers)

    def load_extensions(self):
        groups = map(
            lambda group: f"{self.commands_ext_prefix}{group}.{group}",
            [
                dirname.split(".", 1)[0]
                for dirname in sorted(next(os.walk(self.commands_path), (None, [], []))[1])
                if dirname.split(".", 1)[0] not in ["__pycache__"]
            ],
        )

        for extension in groups:
            importlib.import_module(extension).setup(self)

        self._loaded = True

    def run(self, argv: Optional[List[str]] = None) -> int:
        """Parses the command line, dispatches to the command handler and returns the process exit code."""
        if not self._loaded:
            self.load_extensions()

        try:
            args, extra = self.parser.parse_known_args(argv)
            if extra and not getattr(args, "accepts_extra", False):
                self.parser.error(f"unrecognized arguments: {' '.join(extra)}")
        except SystemExit as e:
            return int(e.code or 0)

        if args.verbose:
            logging.getLogger().setLevel(logging.DEBUG)

        try:
            return args.handler(args, extra)
        except NMQJError as e:
            logging.error(str(e))
            return EXIT_USAGE


app = NMQJ()
