"""Multi-seed comparison runs on the synthetic dataset.

`run_arms` trains several model variants under one budget and reports the
median best top-1 of each; `run_two_stream` trains an RGB and a pseudo-flow
stream per seed and sweeps their late fusion.
"""
from __future__ import annotations

from collections.abc import Sequence
from pathlib import Path
from typing import Any

from app.core.setup_logging import logger
from app.data.dataset import ClipDataset, ClipLoader
from app.data.manifest import MANIFEST_NAME, read_manifest
from app.data.synthetic import generate_synthetic
from app.fusion.late_fusion import alpha_sweep, export_records, write_export
from app.models.config import ExperimentConfig
from app.models.experiments import ArmResult, ComparisonReport, TwoStreamReport, TwoStreamSeed
from app.models.presets import build_config, deep_merge, preset_overlay, stream_overlay
from .metrics import collect_logits, evaluate
from .trainer import BEST_CHECKPOINT, Trainer, load_model

LEARNING_ARMS: dict[str, dict[str, Any]] = {
  "full": {},
  "global_only": {"global_only": True},
}

ABLATION_ARMS: dict[str, dict[str, Any]] = {
  "full": {},
  **{
    name: preset_overlay(name)["model"]
    for name in (
      "ablation_baseline",
      "ablation_spatial_only",
      "ablation_temporal_only",
      "ablation_lr_only",
      "ablation_tb_only",
      "ablation_concat",
      "ablation_no_gru",
    )
  },
}


def variant(
  config: ExperimentConfig, seed: int, overlay: dict[str, Any] | None = None,
) -> ExperimentConfig:
  """`config` reseeded and overlaid, revalidated as a new experiment."""
  raw = deep_merge(config.model_dump(mode="json"), {"seed": seed, **(overlay or {})})
  return build_config(raw)


def ensure_dataset(config: ExperimentConfig) -> Path:
  """Generate ``data.synthetic`` under ``data.root`` unless a manifest is there."""
  root = Path(config.data.root)
  if not (root / MANIFEST_NAME).exists():
    logger.info(f"No dataset at {root}; generating the synthetic one")
    generate_synthetic(config.data.synthetic, root)
  return root


def run_arms(
  config: ExperimentConfig,
  arms: dict[str, dict[str, Any]],
  seeds: Sequence[int],
  out_dir: str | Path,
  *,
  num_workers: int = 2,
) -> ComparisonReport:
  """Train every arm once per seed; runs land in ``out_dir/<arm>/seed<k>``."""
  ensure_dataset(config)
  out_dir = Path(out_dir)
  results = []
  for name, switches in arms.items():
    top1 = []
    for seed in seeds:
      run = variant(config, seed, {"model": switches})
      result = Trainer(run, out_dir / name / f"seed{seed}", num_workers=num_workers).train()
      top1.append(result.best_top1)
    arm = ArmResult(name=name, seeds=list(seeds), top1=top1)
    logger.info(f"{name}: median best top-1 {arm.median_top1:.2f} over seeds {list(seeds)}")
    results.append(arm)
  return ComparisonReport(arms=results, config_hash=config.config_hash())


def _train_stream(
  config: ExperimentConfig, stream: str, seed: int, out_dir: Path, num_workers: int,
) -> tuple[Path, float]:
  """Train one stream and export the best checkpoint's test logits."""
  run = variant(config, seed, stream_overlay(stream))
  run_dir = out_dir / stream / f"seed{seed}"
  Trainer(run, run_dir, num_workers=num_workers).train()
  trained, model = load_model(run_dir / BEST_CHECKPOINT)
  records = read_manifest(trained.data.root, trained.model.num_classes)
  dataset = ClipDataset(trained.data, "test", seed=trained.seed, records=records)
  loader = ClipLoader(dataset, trained.schedule.batch_size, num_workers)
  results = collect_logits(model, dataset, loader)
  export = run_dir / "logits.jsonl"
  write_export(export, export_records(results, trained.model.prediction_head))
  return export, evaluate(model, dataset, results=results).top1_pi


def run_two_stream(
  config: ExperimentConfig,
  seeds: Sequence[int],
  out_dir: str | Path,
  *,
  num_workers: int = 2,
) -> TwoStreamReport:
  """RGB and pseudo-flow streams per seed, fused over ``fusion.grid``."""
  ensure_dataset(config)
  out_dir = Path(out_dir)
  runs = []
  for seed in seeds:
    rgb_export, rgb_top1 = _train_stream(config, "rgb", seed, out_dir, num_workers)
    flow_export, flow_top1 = _train_stream(config, "flow", seed, out_dir, num_workers)
    report = alpha_sweep(rgb_export, flow_export, config.fusion.grid, config.config_hash())
    best = next(row for row in report.rows if row.alpha == report.best_alpha)
    runs.append(TwoStreamSeed(
      seed=seed,
      rgb_top1=rgb_top1,
      flow_top1=flow_top1,
      fused_top1=best.metrics.top1_pi,
      best_alpha=report.best_alpha,
    ))
    logger.info(
      f"seed {seed}: rgb {rgb_top1:.2f}, flow {flow_top1:.2f}, "
      f"fused {best.metrics.top1_pi:.2f} at alpha {report.best_alpha}",
    )
  return TwoStreamReport(runs=runs, config_hash=config.config_hash())
