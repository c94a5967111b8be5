"""Simple entry point for the StepNet desk artifact."""

import sys
from pathlib import Path

from dotenv import load_dotenv

from app.core.config import init_config
from app.core.threads import deterministic_flag, pin_threads


def load_environment() -> None:
  """Load STEPNET_* overrides from a .env file, if present."""
  env_path = Path() / ".env"
  load_dotenv(dotenv_path=env_path)


def main() -> int:
  """Resolve the thread policy, then run the CLI."""
  load_environment()
  argv = sys.argv[1:]
  pin_threads(init_config(deterministic=deterministic_flag(argv)))

  from app.main import cli_dispatch  # noqa: PLC0415
  return cli_dispatch(argv)


if __name__ == "__main__":
  sys.exit(main())
