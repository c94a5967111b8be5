"""Two-stream late fusion over exported logits."""
from __future__ import annotations

from collections.abc import Sequence
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import ValidationError

from app.core.errors import DataError, ShapeError
from app.core.setup_logging import logger
from app.models.fusion import FusionReport, FusionRow, LogitRecord
from app.models.metrics import EvalMetrics
from app.training.metrics import ClipLogits, compute_metrics


def late_fuse(q_rgb: np.ndarray, q_opt: np.ndarray, alpha: float) -> np.ndarray:
  """``q_rgb + α·q_opt`` elementwise (rows may be stacked clips)."""
  q_rgb, q_opt = np.asarray(q_rgb, dtype=np.float64), np.asarray(q_opt, dtype=np.float64)
  if q_rgb.shape != q_opt.shape:
    error_msg = f"cannot fuse logits of shapes {q_rgb.shape} and {q_opt.shape}"
    raise ShapeError(error_msg)
  return q_rgb + alpha * q_opt


def export_records(results: Sequence[ClipLogits], head: str = "q_st") -> list[LogitRecord]:
  """One export record per evaluated clip, from the given head."""
  return [
    LogitRecord(clip_id=r.clip_id, label=r.label, logits=r.heads[head].tolist())
    for r in results
  ]


def write_export(path: str | Path, records: Sequence[LogitRecord]) -> None:
  path = Path(path)
  path.parent.mkdir(parents=True, exist_ok=True)
  path.write_text("".join(f"{record.model_dump_json()}\n" for record in records))
  logger.info(f"Wrote {len(records)} logit records to {path}")


def read_export(path: str | Path) -> dict[str, LogitRecord]:
  """Records keyed by clip id.

  Raises:
      DataError: unreadable file, invalid record, duplicate clip id or
        varying logit length

  """
  path = Path(path)
  try:
    lines = path.read_text().splitlines()
  except OSError as e:
    error_msg = f"cannot read logit export {path}: {e}"
    raise DataError(error_msg) from e
  records: dict[str, LogitRecord] = {}
  for number, line in enumerate(lines, start=1):
    if not line.strip():
      continue
    try:
      record = LogitRecord.model_validate_json(line)
    except ValidationError as e:
      error_msg = f"{path}:{number}: invalid logit record: {e}"
      raise DataError(error_msg) from e
    if record.clip_id in records:
      error_msg = f"{path}: clip id {record.clip_id} appears twice"
      raise DataError(error_msg)
    records[record.clip_id] = record
  if len({len(r.logits) for r in records.values()}) > 1:
    error_msg = f"{path}: logit length varies between records"
    raise DataError(error_msg)
  if not records:
    error_msg = f"logit export {path} is empty"
    raise DataError(error_msg)
  return records


def align_exports(
  rgb: dict[str, LogitRecord], opt: dict[str, LogitRecord],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
  """Stack both streams in sorted clip-id order.

  Raises:
      DataError: the clip sets differ (the message lists the symmetric
        difference) or a clip's labels disagree

  """
  difference = sorted(set(rgb) ^ set(opt))
  if difference:
    error_msg = f"exports cover different clips; symmetric difference: {difference}"
    raise DataError(error_msg)
  ids = sorted(rgb)
  conflicting = [i for i in ids if rgb[i].label != opt[i].label]
  if conflicting:
    error_msg = f"exports disagree on the labels of {conflicting}"
    raise DataError(error_msg)
  labels = np.array([rgb[i].label for i in ids])
  q_rgb = np.array([rgb[i].logits for i in ids])
  q_opt = np.array([opt[i].logits for i in ids])
  return q_rgb, q_opt, labels


def fuse_metrics(
  rgb: dict[str, LogitRecord], opt: dict[str, LogitRecord], alpha: float,
) -> EvalMetrics:
  q_rgb, q_opt, labels = align_exports(rgb, opt)
  return compute_metrics(late_fuse(q_rgb, q_opt, alpha), labels)


def alpha_sweep(
  rgb_export: str | Path,
  opt_export: str | Path,
  grid: Sequence[float],
  config_hash: str | None = None,
) -> FusionReport:
  """Metrics for every α of `grid`; the best top-1 α wins, lowest α on ties."""
  rgb, opt = read_export(rgb_export), read_export(opt_export)
  q_rgb, q_opt, labels = align_exports(rgb, opt)
  rows = [
    FusionRow(alpha=alpha, metrics=compute_metrics(late_fuse(q_rgb, q_opt, alpha), labels))
    for alpha in grid
  ]
  best = rows[0]
  for row in rows[1:]:
    if row.metrics.top1_pi > best.metrics.top1_pi:
      best = row
  logger.info(f"Best alpha {best.alpha} with top-1 {best.metrics.top1_pi:.2f}")
  return FusionReport(
    rows=rows,
    best_alpha=best.alpha,
    rgb_export=str(rgb_export),
    opt_export=str(opt_export),
    config_hash=config_hash,
  )


def report_table(report: FusionReport) -> str:
  """Human-readable sweep table."""
  frame = pd.DataFrame(
    [{"alpha": row.alpha, **row.metrics.model_dump(exclude={"num_clips"})} for row in report.rows],
  )
  lines = [frame.to_string(index=False, float_format=lambda v: f"{v:.2f}")]
  lines.append(f"best alpha: {report.best_alpha}")
  return "\n".join(lines)
