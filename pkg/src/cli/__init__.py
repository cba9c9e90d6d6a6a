"""Command-line entry point: ``awae <command> [options]``.

Exit codes: 0 success, 1 usage or configuration error, 2 data or numeric
error.
"""

from __future__ import annotations

import argparse
import sys
from collections.abc import Sequence

from ..core.config import get_settings
from ..core.logging_config import configure_logging
from ..core.tracing import init_tracing
from ..schemas.training import VaeTrainConfig
from . import compare, evaluate, prepare, sweep, synthesize, train
from .errors import run_command

COMMANDS = (prepare, train, evaluate, compare, sweep, synthesize)


class ArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _config_epilog() -> str:
    lines = ["configuration keys (--config file or --set key=value):"]
    for key, (default, description) in VaeTrainConfig.flat_fields().items():
        lines.append(f"  {key:<22} {description} [default: {default}]")
    return "\n".join(lines)


def build_parser() -> ArgumentParser:
    settings = get_settings()
    parser = ArgumentParser(
        prog="awae",
        description="Sparse-coded Wasserstein autoencoders for implicit feedback.",
        epilog=_config_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {settings.APP_VERSION}"
    )
    subparsers = parser.add_subparsers(
        dest="command", required=True, parser_class=ArgumentParser
    )
    for command in COMMANDS:
        command.add_parser(subparsers)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    configure_logging()
    init_tracing(role="cli")
    args = build_parser().parse_args(argv)
    return run_command(args.func, args)


__all__ = ["build_parser", "main"]
