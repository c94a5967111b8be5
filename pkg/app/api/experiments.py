"""Multi-seed comparison command."""
import argparse
from pathlib import Path

import pandas as pd

from app.api import arg, command
from app.core.config import get_config
from app.models.config import ExperimentConfig
from app.training.experiments import ABLATION_ARMS, LEARNING_ARMS, run_arms, run_two_stream

SUITES = ("learning", "ablation", "fusion")


@command(
  "compare",
  "Train variants or both streams over several seeds and compare them",
  arg("--suite", choices=SUITES, default="learning", help="Comparison to run (default: learning)"),
  arg("--seeds", type=int, nargs="+", default=[0, 1, 2], help="Run seeds (default: 0 1 2)"),
  arg("--out", default=None, help="Runs directory (default: <workdir>/<suite>)"),
  arg("--report", default=None, help="Write the comparison report as JSON"),
)
def compare(args: argparse.Namespace, experiment: ExperimentConfig) -> None:
  """Print one row per variant (or per seed for the fusion suite)."""
  settings = get_config()
  out = Path(args.out or Path(settings.workdir) / args.suite)
  if args.suite == "fusion":
    report = run_two_stream(experiment, args.seeds, out, num_workers=settings.num_workers)
    table = pd.DataFrame([run.model_dump() for run in report.runs])
  else:
    arms = LEARNING_ARMS if args.suite == "learning" else ABLATION_ARMS
    report = run_arms(experiment, arms, args.seeds, out, num_workers=settings.num_workers)
    table = pd.DataFrame([
      {"variant": arm.name, "median_top1": arm.median_top1, "top1": arm.top1}
      for arm in report.arms
    ])
  print(table.to_string(index=False, float_format=lambda v: f"{v:.2f}"))
  if args.report:
    Path(args.report).write_text(report.model_dump_json(indent=2) + "\n")
