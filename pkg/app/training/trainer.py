"""Epoch loop: forward, accumulated loss, backward, AdamW, evaluation, checkpoints."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import NamedTuple

import numpy as np
from pydantic import ValidationError

from app.core.errors import ConfigError, NumericError
from app.core.setup_logging import logger
from app.data.dataset import ClipDataset, ClipLoader
from app.data.manifest import read_manifest
from app.models.config import ExperimentConfig
from app.models.metrics import CheckpointMeta, EpochRecord
from app.nn.tensor import Tape, Tensor, backward
from app.services.interfaces import StepNet
from app.util.seeding import derive_rng
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .metrics import evaluate
from .optim import AdamWState, adamw_step
from .schedule import lr_at

METRICS_LOG = "metrics.jsonl"
LAST_CHECKPOINT = "last.ckpt"
BEST_CHECKPOINT = "best.ckpt"
RUN_FILE = "run.json"
SHUFFLE_STREAM = 7


class TrainResult(NamedTuple):
  """Outcome of a training run."""

  history: list[EpochRecord]
  best_top1: float
  out_dir: Path


def stream_index(config: ExperimentConfig) -> int:
  """Initialisation stream: 0 for RGB, 1 for flow, so two-stream weights differ."""
  return 1 if config.data.modality == "flow" else 0


def build_model(config: ExperimentConfig, params: dict[str, np.ndarray] | None = None) -> StepNet:
  """StepNet for `config`, freshly initialised or adopting stored arrays."""
  tensors = None
  if params is not None:
    tensors = {
      name: Tensor(value, requires_grad=True, precision=config.precision, name=name)
      for name, value in params.items()
    }
  return StepNet(
    config.model,
    precision=config.precision,
    seed=config.seed,
    stream=stream_index(config),
    params=tensors,
  )


def load_model(path: str | Path) -> tuple[ExperimentConfig, StepNet]:
  """Rebuild the config and model stored in a checkpoint."""
  checkpoint = load_checkpoint(path)
  try:
    config = ExperimentConfig.model_validate(checkpoint.meta.config)
  except ValidationError as e:
    error_msg = f"checkpoint {path} holds an invalid config: {e}"
    raise ConfigError(error_msg) from e
  return config, build_model(config, checkpoint.params)


class Trainer:
  """Trains one StepNet stream and writes its run directory.

  Available public methods:
    - train: run (or resume) the epoch loop

  """

  def __init__(
    self, config: ExperimentConfig, out_dir: str | Path, *, num_workers: int = 2,
  ) -> None:
    """Load both splits and initialise the model and optimizer."""
    self.config = config
    self.config_hash = config.config_hash()
    self.out_dir = Path(out_dir)
    records = read_manifest(config.data.root, config.model.num_classes)
    self.train_set = ClipDataset(config.data, "train", seed=config.seed, records=records)
    self.test_set = ClipDataset(config.data, "test", seed=config.seed, records=records)
    schedule = config.schedule
    self.train_loader = ClipLoader(
      self.train_set, schedule.batch_size, num_workers, ordered=config.deterministic,
    )
    self.test_loader = ClipLoader(self.test_set, schedule.batch_size, num_workers)
    self.steps_per_epoch = math.ceil(len(self.train_set) / schedule.batch_size)
    self.model = build_model(config)
    self.optimizer = AdamWState(schedule.betas, schedule.eps, schedule.weight_decay)
    self.shuffle = derive_rng(config.seed, SHUFFLE_STREAM)
    self.best_top1 = -1.0
    self.next_epoch = 1

  @property
  def log_path(self) -> Path:
    return self.out_dir / METRICS_LOG

  def _checkpoint(self) -> Checkpoint:
    names = sorted(self.model.params)
    meta = CheckpointMeta(
      config_hash=self.config_hash,
      config=self.config.model_dump(mode="json"),
      next_epoch=self.next_epoch,
      step=self.optimizer.step,
      best_top1=self.best_top1,
      rng_state=self.shuffle.bit_generator.state,
      param_names=names,
    )
    params = {name: self.model.params[name].data for name in names}
    return Checkpoint(meta, params, dict(self.optimizer.m), dict(self.optimizer.v))

  def _restore(self) -> None:
    checkpoint = load_checkpoint(self.out_dir / LAST_CHECKPOINT)
    if checkpoint.meta.config_hash != self.config_hash:
      error_msg = (
        f"cannot resume: checkpoint config {checkpoint.meta.config_hash[:12]} "
        f"differs from {self.config_hash[:12]}"
      )
      raise ConfigError(error_msg)
    self.model = build_model(self.config, checkpoint.params)
    self.optimizer.m = dict(checkpoint.adam_m)
    self.optimizer.v = dict(checkpoint.adam_v)
    self.optimizer.step = checkpoint.meta.step
    self.shuffle.bit_generator.state = checkpoint.meta.rng_state
    self.best_top1 = checkpoint.meta.best_top1
    self.next_epoch = checkpoint.meta.next_epoch
    kept = [r for r in self.read_log() if r.epoch < self.next_epoch]
    self.log_path.write_text("".join(f"{r.model_dump_json()}\n" for r in kept))
    logger.info(f"Resumed {self.out_dir} at epoch {self.next_epoch} (step {self.optimizer.step})")

  def read_log(self) -> list[EpochRecord]:
    if not self.log_path.exists():
      return []
    return [
      EpochRecord.model_validate_json(line)
      for line in self.log_path.read_text().splitlines() if line.strip()
    ]

  def _update(self, batch_size: int) -> float:
    """Apply one AdamW step with the batch-mean gradient; returns the rate used."""
    lr = lr_at(self.optimizer.step + 1, self.config.schedule, self.steps_per_epoch)
    params = {name: tensor.data for name, tensor in self.model.params.items()}
    grads = {
      name: tensor.grad / batch_size
      for name, tensor in self.model.params.items() if tensor.grad is not None
    }
    updated = adamw_step(params, grads, self.optimizer, lr)
    self.model.params = {
      name: Tensor(value, requires_grad=True, precision=self.config.precision, name=name)
      for name, value in updated.items()
    }
    return lr

  def _train_epoch(self, epoch: int) -> tuple[float, float]:
    order = self.shuffle.permutation(len(self.train_set)).tolist()
    losses = []
    lr = 0.0
    for batch in self.train_loader.batches(order, "train", epoch):
      for sample in batch:
        with Tape() as tape:
          loss = self.model.loss(
            Tensor(sample.clip, precision=self.config.precision), sample.label,
          )
        backward(tape, loss)
        losses.append(loss.item())
      lr = self._update(len(batch))
      logger.debug(
        f"epoch {epoch} step {self.optimizer.step}: lr {lr:.3e}, "
        f"batch loss {np.mean(losses[-len(batch):]):.4f}",
      )
    return float(np.mean(losses)), lr

  def train(self, *, resume: bool = False) -> TrainResult:
    """Run the remaining epochs, logging metrics and keeping best/last checkpoints.

    Raises:
        NumericError: a loss or gradient became non-finite; the last good
          checkpoint is left in place.

    """
    self.out_dir.mkdir(parents=True, exist_ok=True)
    if resume:
      self._restore()
    else:
      self.log_path.write_text("")
      run = {"config_hash": self.config_hash, "config": self.config.model_dump(mode="json")}
      (self.out_dir / RUN_FILE).write_text(json.dumps(run, indent=2, sort_keys=True) + "\n")
    logger.info(
      f"Training {self.config.data.modality} stream, config {self.config_hash[:12]}, "
      f"{len(self.train_set)} train / {len(self.test_set)} test clips",
    )

    for epoch in range(self.next_epoch, self.config.schedule.epochs + 1):
      try:
        train_loss, lr = self._train_epoch(epoch)
      except NumericError:
        logger.error(f"Numeric failure in epoch {epoch}; keeping {LAST_CHECKPOINT}")
        raise
      metrics = evaluate(self.model, self.test_set, self.test_loader)
      record = EpochRecord(
        epoch=epoch, lr=lr, train_loss=train_loss,
        **metrics.model_dump(exclude={"num_clips"}),
      )
      with self.log_path.open("a") as log:
        log.write(record.model_dump_json() + "\n")
      self.next_epoch = epoch + 1
      improved = metrics.top1_pi > self.best_top1
      if improved:
        self.best_top1 = metrics.top1_pi
      checkpoint = self._checkpoint()
      save_checkpoint(self.out_dir / LAST_CHECKPOINT, checkpoint)
      if improved:
        save_checkpoint(self.out_dir / BEST_CHECKPOINT, checkpoint)
      logger.info(
        f"epoch {epoch}: loss {train_loss:.4f}, top1 {metrics.top1_pi:.2f}, "
        f"top5 {metrics.top5_pi:.2f}, lr {lr:.2e}",
      )
    return TrainResult(self.read_log(), self.best_top1, self.out_dir)
