"""Late-fusion command."""
import argparse
from pathlib import Path

from app.api import arg, command
from app.core.errors import ConfigError
from app.fusion.late_fusion import alpha_sweep, fuse_metrics, read_export, report_table
from app.models.config import ExperimentConfig


@command(
  "fuse",
  "Fuse RGB and flow logit exports",
  arg("--rgb", required=True, help="RGB logit export"),
  arg("--flow", required=True, help="Flow logit export"),
  arg("--alpha", type=float, default=None, help="Flow weight (default: fusion.alpha)"),
  arg("--sweep", action="store_true", help="Sweep fusion.grid instead of one alpha"),
  arg("--report", default=None, help="Write the sweep report as JSON"),
)
def fuse(args: argparse.Namespace, experiment: ExperimentConfig) -> None:
  """Print fused metrics for one alpha, or the sweep table."""
  if args.sweep and args.alpha is not None:
    error_msg = "--alpha and --sweep are mutually exclusive"
    raise ConfigError(error_msg)
  if not args.sweep:
    alpha = experiment.fusion.alpha if args.alpha is None else args.alpha
    metrics = fuse_metrics(read_export(args.rgb), read_export(args.flow), alpha)
    print(metrics.model_dump_json(indent=2))
    return
  report = alpha_sweep(args.rgb, args.flow, experiment.fusion.grid, experiment.config_hash())
  print(report_table(report))
  if args.report:
    Path(args.report).write_text(report.model_dump_json(indent=2) + "\n")
