"""CLI command handlers.

Each subcommand is a thin handler registered with `command`: it logs, calls
the service layer and prints its result. `run_command` loads the experiment
config and translates domain errors into exit statuses.
"""
from __future__ import annotations

import argparse
from collections.abc import Callable
from typing import Any, NamedTuple

from app.core.config import get_config
from app.core.errors import NumericError, StepNetError
from app.core.setup_logging import logger
from app.models.config import ExperimentConfig
from app.models.presets import deep_merge, load_experiment_config, stream_overlay

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERIC = 2

Handler = Callable[[argparse.Namespace, ExperimentConfig], None]


class Argument(NamedTuple):
  """Positional and keyword arguments of one `add_argument` call."""

  flags: tuple[str, ...]
  options: dict[str, Any]


def arg(*flags: str, **options: Any) -> Argument:  # noqa: ANN401
  return Argument(flags, options)


class Command(NamedTuple):
  """One registered subcommand."""

  name: str
  help: str
  handler: Handler
  arguments: tuple[Argument, ...]


COMMANDS: dict[str, Command] = {}


def command(name: str, help_text: str, *arguments: Argument) -> Callable[[Handler], Handler]:
  """Register a handler under subcommand `name`."""
  def register(handler: Handler) -> Handler:
    COMMANDS[name] = Command(name, help_text, handler, arguments)
    return handler
  return register


def experiment_overrides(args: argparse.Namespace) -> dict[str, Any]:
  """CLI flags first, then STEPNET_* settings that were set explicitly."""
  settings = get_config()
  overrides: dict[str, Any] = {
    field: getattr(settings, field)
    for field in ("seed", "deterministic")
    if field in settings.model_fields_set
  }
  if getattr(args, "seed", None) is not None:
    overrides["seed"] = args.seed
  if getattr(args, "deterministic", None) is not None:
    overrides["deterministic"] = args.deterministic
  if getattr(args, "stream", None):
    overrides = deep_merge(overrides, stream_overlay(args.stream))
  return overrides


def run_command(args: argparse.Namespace) -> int:
  """Run the selected handler and map the outcome to an exit status."""
  handler = COMMANDS[args.command].handler
  try:
    experiment = load_experiment_config(args.config, args.preset, experiment_overrides(args))
    logger.debug(f"{args.command}: config {experiment.config_hash()[:12]} ({args.preset})")
    handler(args, experiment)
  except NumericError as e:
    logger.error(f"{args.command} failed on a numeric error: {e}")
    return EXIT_NUMERIC
  except StepNetError as e:
    logger.error(f"{args.command} failed: {e}")
    return EXIT_INVALID
  return EXIT_OK


# Register all commands
from . import data, experiments, fusion, training, verification  # noqa: E402, F401
