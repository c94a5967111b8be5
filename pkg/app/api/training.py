"""Training and evaluation commands."""
import argparse
from pathlib import Path

import pandas as pd

from app.api import arg, command
from app.core.config import get_config
from app.core.setup_logging import logger
from app.data.dataset import ClipDataset, ClipLoader
from app.data.manifest import read_manifest
from app.fusion.late_fusion import export_records, write_export
from app.models.config import ExperimentConfig
from app.training.metrics import collect_logits, evaluate, evaluate_heads
from app.training.trainer import Trainer, load_model


@command(
  "train",
  "Train one StepNet stream",
  arg("--out", default=None, help="Run directory (default: <workdir>/<stream>)"),
  arg(
    "--stream", choices=["rgb", "flow"], default=None,
    help="Input stream (default: data.modality)",
  ),
  arg("--resume", action="store_true", help="Continue from last.ckpt in the run directory"),
)
def train(args: argparse.Namespace, experiment: ExperimentConfig) -> None:
  """Train, writing metrics.jsonl, last.ckpt and best.ckpt."""
  settings = get_config()
  out = Path(args.out or Path(settings.workdir) / experiment.data.modality)
  result = Trainer(experiment, out, num_workers=settings.num_workers).train(resume=args.resume)
  logger.info(f"Run directory {result.out_dir}, best top-1 {result.best_top1:.2f}")
  if result.history:
    print(result.history[-1].model_dump_json())


@command(
  "eval",
  "Evaluate a checkpoint on one split",
  arg("--checkpoint", required=True, help="Checkpoint file"),
  arg("--split", choices=["train", "test"], default="test", help="Split (default: test)"),
  arg("--data-root", default=None, help="Dataset directory (default: the checkpoint's)"),
  arg("--export-logits", default=None, help="Write the q_st logits as JSON lines"),
  arg("--per-head", action="store_true", help="Also report every head's accuracy"),
)
def evaluate_checkpoint(
  args: argparse.Namespace, experiment: ExperimentConfig,  # noqa: ARG001
) -> None:
  """Print the four accuracies of the checkpoint's prediction head."""
  config, model = load_model(args.checkpoint)
  data = config.data
  if args.data_root:
    data = data.model_copy(update={"root": args.data_root})
  records = read_manifest(data.root, config.model.num_classes)
  dataset = ClipDataset(data, args.split, seed=config.seed, records=records)
  loader = ClipLoader(dataset, config.schedule.batch_size, get_config().num_workers)
  results = collect_logits(model, dataset, loader)
  metrics = evaluate(model, dataset, results=results)
  print(metrics.model_dump_json(indent=2))
  if args.per_head:
    table = pd.DataFrame([h.model_dump() for h in evaluate_heads(results)])
    print(table.to_string(index=False, float_format=lambda v: f"{v:.2f}"))
  if args.export_logits:
    write_export(args.export_logits, export_records(results, config.model.prediction_head))
