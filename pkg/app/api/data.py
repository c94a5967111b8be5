"""Dataset commands."""
import argparse

from app.api import arg, command
from app.core.setup_logging import logger
from app.data.synthetic import generate_synthetic
from app.models.config import ExperimentConfig


@command(
  "gen-data",
  "Generate the synthetic part-dependent dataset",
  arg("--out", default=None, help="Dataset directory (default: data.root)"),
)
def gen_data(args: argparse.Namespace, experiment: ExperimentConfig) -> None:
  """Render every clip and the manifest of ``data.synthetic``."""
  out = args.out or experiment.data.root
  spec = experiment.data.synthetic
  logger.info(
    f"Generating {spec.num_classes} classes × {spec.clips_per_class} clips into {out}",
  )
  records = generate_synthetic(spec, out)
  print(f"{len(records)} clips written to {out}")
