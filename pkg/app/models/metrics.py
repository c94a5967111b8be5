"""Pydantic models for evaluation and training logs."""
from pydantic import BaseModel, Field


class EvalMetrics(BaseModel):
  """Accuracies in percent."""

  top1_pi: float = Field(..., description="Per-instance top-1")
  top5_pi: float = Field(..., description="Per-instance top-5")
  top1_pc: float = Field(..., description="Per-class top-1")
  top5_pc: float = Field(..., description="Per-class top-5")
  num_clips: int = Field(..., description="Clips evaluated")


class HeadAccuracy(BaseModel):
  """Per-instance accuracy of one classifier head."""

  head: str = Field(..., description="Head name, e.g. q_lr")
  top1: float = Field(..., description="Top-1 percent")
  top5: float = Field(..., description="Top-5 percent")


class EpochRecord(BaseModel):
  """One line of the metrics log."""

  epoch: int = Field(..., description="1-based epoch")
  lr: float = Field(..., description="Learning rate of the epoch's last update")
  train_loss: float = Field(..., description="Mean total loss over training clips")
  top1_pi: float
  top5_pi: float
  top1_pc: float
  top5_pc: float


class CheckpointMeta(BaseModel):
  """Metadata member of a checkpoint archive."""

  version: int = Field(default=1, description="Checkpoint format version")
  config_hash: str = Field(..., description="Hash of the experiment config")
  config: dict = Field(..., description="Experiment config dump")
  next_epoch: int = Field(..., description="First epoch still to run (1-based)")
  step: int = Field(..., description="Optimizer updates applied")
  best_top1: float = Field(..., description="Best per-instance top-1 so far")
  rng_state: dict = Field(..., description="Bit-generator state of the shuffling RNG")
  param_names: list[str] = Field(..., description="Parameter order")
