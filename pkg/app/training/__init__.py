"""Optimizer, schedule, metrics, checkpoints and the training loop."""
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .metrics import ClipLogits, collect_logits, compute_metrics, evaluate, evaluate_heads
from .optim import AdamWState, adamw_step
from .schedule import lr_at
from .trainer import Trainer, TrainResult, build_model, load_model

__all__ = [
  "AdamWState",
  "Checkpoint",
  "ClipLogits",
  "TrainResult",
  "Trainer",
  "adamw_step",
  "build_model",
  "collect_logits",
  "compute_metrics",
  "evaluate",
  "evaluate_heads",
  "load_checkpoint",
  "load_model",
  "lr_at",
  "save_checkpoint",
]
