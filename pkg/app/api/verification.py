"""Shape and gradient verification commands."""
import argparse

import pandas as pd

from app.api import arg, command
from app.core.errors import NumericError, ShapeError
from app.models.config import ExperimentConfig
from app.models.presets import preset
from app.services.shapes import REFERENCE_SHAPES, check_forward_shapes, param_count, shape_report
from app.services.verification import run_gradcheck_suite


@command(
  "shapes",
  "Print every named tensor's shape",
  arg(
    "--paper-scale", "--reference-scale", dest="paper_scale", action="store_true",
    help="Use the paper-scale preset and diff against its shape table",
  ),
  arg("--check-forward", action="store_true", help="Also run one real forward (desk scale only)"),
)
def shapes(args: argparse.Namespace, experiment: ExperimentConfig) -> None:
  """Analytic shapes plus the implied parameter count."""
  config = preset("paper") if args.paper_scale else experiment
  rows = shape_report(config, REFERENCE_SHAPES if args.paper_scale else None)
  for row in rows:
    print(row.render())
  print(f"params: {param_count(config)}")
  mismatched = [row.name for row in rows if not row.matches]
  if mismatched:
    error_msg = f"shapes differ from the reference table: {mismatched}"
    raise ShapeError(error_msg)
  if args.check_forward:
    check_forward_shapes(config)
    print("forward shapes agree")


@command(
  "gradcheck",
  "Run the finite-difference gradient suite",
  arg("--full", action="store_true", help="Check every coordinate of the full model"),
)
def gradcheck(args: argparse.Namespace, experiment: ExperimentConfig) -> None:
  """Print each check's maximum relative error."""
  report = run_gradcheck_suite(experiment.seed, full_model_coords=None if args.full else 8)
  table = pd.DataFrame([
    {
      "check": e.name,
      "max_rel_error": e.max_rel_error,
      "tolerance": e.tolerance,
      "passed": e.passed,
    }
    for e in report.entries
  ])
  print(table.to_string(index=False))
  print(f"max relative error: {report.max_error:.3e}")
  if not report.passed:
    failed = [e.name for e in report.entries if not e.passed]
    error_msg = f"gradient checks above tolerance: {failed}"
    raise NumericError(error_msg)
