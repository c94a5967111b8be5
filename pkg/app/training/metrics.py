"""Top-k accuracies per instance and per class."""
from __future__ import annotations

from collections.abc import Sequence
from typing import NamedTuple

import numpy as np
import pandas as pd

from app.core.errors import DataError, ShapeError
from app.core.setup_logging import logger
from app.data.dataset import ClipDataset, ClipLoader
from app.models.metrics import EvalMetrics, HeadAccuracy
from app.nn.tensor import Tensor
from app.services.interfaces import StepNet


class ClipLogits(NamedTuple):
  """Every head's logits for one evaluated clip."""

  clip_id: str
  label: int
  heads: dict[str, np.ndarray]


def topk_hits(logits: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
  """Whether each label is among its row's k largest logits (ties to lower index)."""
  k = min(k, logits.shape[1])
  ranked = np.argsort(-logits, axis=1, kind="stable")[:, :k]
  return (ranked == labels[:, None]).any(axis=1)


def accuracy_table(logits: np.ndarray, labels: Sequence[int]) -> pd.DataFrame:
  """Per-clip hit table with columns label, top1, top5."""
  logits = np.asarray(logits, dtype=np.float64)
  labels = np.asarray(labels, dtype=int)
  if logits.ndim != 2 or logits.shape[0] != labels.shape[0]:
    error_msg = f"logits {logits.shape} do not match {labels.shape[0]} labels"
    raise ShapeError(error_msg)
  if labels.size == 0:
    error_msg = "cannot evaluate an empty split"
    raise DataError(error_msg)
  return pd.DataFrame({
    "label": labels,
    "top1": topk_hits(logits, labels, 1),
    "top5": topk_hits(logits, labels, 5),
  })


def compute_metrics(logits: np.ndarray, labels: Sequence[int]) -> EvalMetrics:
  """Per-instance and per-class top-1/top-5 in percent.

  Per-class scores average the accuracy of the classes present in `labels`.
  """
  table = accuracy_table(logits, labels)
  per_class = table.groupby("label")[["top1", "top5"]].mean()
  return EvalMetrics(
    top1_pi=100.0 * float(table["top1"].mean()),
    top5_pi=100.0 * float(table["top5"].mean()),
    top1_pc=100.0 * float(per_class["top1"].mean()),
    top5_pc=100.0 * float(per_class["top5"].mean()),
    num_clips=len(table),
  )


def collect_logits(
  model: StepNet, dataset: ClipDataset, loader: ClipLoader | None = None,
) -> list[ClipLogits]:
  """Test-mode inference over a whole split, in split order."""
  loader = loader or ClipLoader(dataset, batch_size=8, num_workers=1)
  results = []
  for batch in loader.batches(range(len(dataset)), "test"):
    for sample in batch:
      bundle = model.logits(Tensor(sample.clip, precision=model.precision))
      heads = {name: logits.data.astype(np.float64) for name, logits in bundle.present().items()}
      results.append(ClipLogits(sample.clip_id, sample.label, heads))
  return results


def head_matrix(results: Sequence[ClipLogits], head: str) -> np.ndarray:
  if not results:
    error_msg = "cannot evaluate an empty split"
    raise DataError(error_msg)
  return np.stack([r.heads[head] for r in results])


def evaluate(
  model: StepNet, dataset: ClipDataset, loader: ClipLoader | None = None,
  results: Sequence[ClipLogits] | None = None,
) -> EvalMetrics:
  """Metrics of the model's prediction head over a split."""
  results = results if results is not None else collect_logits(model, dataset, loader)
  head = model.config.prediction_head
  metrics = compute_metrics(head_matrix(results, head), [r.label for r in results])
  absent = model.config.num_classes - len({r.label for r in results})
  if absent:
    logger.warning(f"{absent} classes have no clips in the {dataset.split} split")
  logger.debug(f"Evaluated {metrics.num_clips} {dataset.split} clips on {head}")
  return metrics


def evaluate_heads(results: Sequence[ClipLogits]) -> list[HeadAccuracy]:
  """Per-instance top-1/top-5 of every head present in the results."""
  labels = [r.label for r in results]
  accuracies = []
  for head in results[0].heads if results else []:
    metrics = compute_metrics(head_matrix(results, head), labels)
    accuracies.append(HeadAccuracy(head=head, top1=metrics.top1_pi, top5=metrics.top5_pi))
  return accuracies
