"""BLAS thread pinning for deterministic runs.

Nothing here imports numpy: the thread variables only take effect when they
are set before the first numpy import.
"""
import argparse
import os
from collections.abc import MutableMapping, Sequence

from app.core.config import Config

THREAD_VARIABLES = ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS")


def deterministic_flag(argv: Sequence[str]) -> bool | None:
  """``--deterministic`` / ``--no-deterministic`` on a raw command line, None if absent."""
  parser = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
  parser.add_argument("--deterministic", action=argparse.BooleanOptionalAction, default=None)
  known, _ = parser.parse_known_args(list(argv))
  return known.deterministic


def pin_threads(config: Config, environ: MutableMapping[str, str] | None = None) -> bool:
  """Force single-threaded BLAS when `config.deterministic`.

  Returns:
      Whether the thread variables were pinned. A non-deterministic config
      leaves the environment as it is.

  """
  environ = os.environ if environ is None else environ
  if not config.deterministic:
    return False
  for variable in THREAD_VARIABLES:
    environ[variable] = "1"
  return True
