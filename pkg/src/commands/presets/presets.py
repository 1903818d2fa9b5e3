import argparse
import logging
from pathlib import Path
from typing import Dict, List

from src.modules.errors import ModelConfigError
from src.modules.model.loader import render_model
from src.modules.model.presets import build_preset, preset_names
from src.nmqj import EXIT_OK, EXIT_USAGE, CommandGroup
from src.utils.config import PresetsConfig, parse_number


def parse_param_arguments(extra: List[str]) -> Dict[str, float]:
    """Turns `--name value` and `--name=value` pairs into preset parameters. Values accept `2pi`-style multiples."""
    params: Dict[str, float] = {}
    idx = 0
    while idx < len(extra):
        token = extra[idx]
        if not token.startswith("--") or len(token) == 2:
            raise ModelConfigError(f"expected a --name value pair, got '{token}'", "params")
        name, separator, value = token[2:].partition("=")
        if not separator:
            if idx + 1 >= len(extra):
                raise ModelConfigError(f"parameter '{name}' has no value", f"params.{name}")
            idx += 1
            value = extra[idx]
        try:
            params[name.replace("-", "_")] = parse_number(value)
        except ValueError as e:
            raise ModelConfigError(f"'{value}' is not a number", f"params.{name}") from e
        idx += 1
    return params


class Presets(CommandGroup):
    name = "presets"

    def register(self, subparsers: argparse._SubParsersAction):
        parser = subparsers.add_parser("presets", help="list the built-in models or render one to a model file")
        actions = parser.add_subparsers(dest="action", required=True)

        list_parser = actions.add_parser("list", help="print the preset names and their defaults")
        list_parser.set_defaults(handler=self.list)

        render_parser = actions.add_parser(
            "render", help="write a preset as a model JSON file; override parameters with --<name> <value>"
        )
        render_parser.add_argument("preset", help="preset name")
        render_parser.add_argument("--out", type=Path, help="model file to write (default: stdout)")
        render_parser.set_defaults(handler=self.render, accepts_extra=True)

    def list(self, args: argparse.Namespace, extra: List[str]) -> int:
        config = PresetsConfig()
        for name in preset_names():
            params = ", ".join(f"{key}={value:g}" for key, value in config.get_params(name).items())
            print(f"{name}\t{params}\t{config.get_description(name)}")
        return EXIT_OK

    def render(self, args: argparse.Namespace, extra: List[str]) -> int:
        try:
            model = build_preset(args.preset, parse_param_arguments(extra))
        except ModelConfigError as e:
            logging.error(str(e))
            return EXIT_USAGE

        rendered = render_model(model)
        if args.out is None:
            print(rendered, end="")
        else:
            args.out.write_text(rendered)
            logging.info(f"Preset '{args.preset}' written to {args.out}")
        return EXIT_OK


def setup(app):
    app.add_group(Presets(app))
