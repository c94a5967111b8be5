"""Command-line surface of the StepNet desk artifact."""
from __future__ import annotations

import argparse
import sys
from collections.abc import Sequence

from app.api import COMMANDS, EXIT_INVALID, run_command
from app.core.config import init_config
from app.core.setup_logging import setup_logging
from app.models.presets import PRESETS


class UsageError(Exception):
  """Unknown flag or malformed command line."""


class ArgumentParser(argparse.ArgumentParser):
  """Raises `UsageError` instead of exiting with status 2."""

  def error(self, message: str) -> None:  # type: ignore[override]
    self.print_usage(sys.stderr)
    raise UsageError(message)


def build_parser() -> ArgumentParser:
  """Global flags plus one subparser per registered command."""
  parser = ArgumentParser(prog="stepnet", description="Desk-scale StepNet sign recogniser")
  parser.add_argument("--config", default=None, help="Experiment config JSON")
  parser.add_argument(
    "--preset", default="desk", choices=sorted(PRESETS), help="Base preset (default: desk)",
  )
  parser.add_argument("--seed", type=int, default=None, help="Run seed")
  parser.add_argument(
    "--deterministic", action=argparse.BooleanOptionalAction, default=None,
    help="Single-threaded BLAS and a fixed batch reduction order (default: on)",
  )
  parser.add_argument("--log-level", default=None, help="Log level (default: INFO)")
  subparsers = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)
  for name, spec in COMMANDS.items():
    sub = subparsers.add_parser(name, help=spec.help, description=spec.help)
    for argument in spec.arguments:
      sub.add_argument(*argument.flags, **argument.options)
  return parser


def cli_dispatch(argv: Sequence[str] | None = None) -> int:
  """Parse `argv`, configure logging and run one subcommand.

  Returns:
      0 on success, 1 on usage or validation errors, 2 on numeric failure.

  """
  parser = build_parser()
  try:
    args = parser.parse_args(argv)
  except UsageError as e:
    print(f"{parser.prog}: error: {e}", file=sys.stderr)
    return EXIT_INVALID
  except SystemExit as e:
    return int(e.code or 0)
  init_config(
    log_level=args.log_level,
    seed=args.seed,
    deterministic=args.deterministic,
  )
  setup_logging()
  return run_command(args)
