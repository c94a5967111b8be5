"""Linear warmup followed by cosine decay, stepped per update."""
from __future__ import annotations

import math

from app.models.config import ScheduleConfig


def lr_at(step: int, schedule: ScheduleConfig, steps_per_epoch: int) -> float:
  """Learning rate of update number `step`.

  Step 0 is the untouched start (rate 0), the warmup ends at the peak after
  ``warmup_epochs·steps_per_epoch`` updates, and the last update of the run
  uses the floor. Later steps stay at the floor.
  """
  warmup = schedule.warmup_epochs * steps_per_epoch
  total = schedule.epochs * steps_per_epoch
  if step <= 0:
    return 0.0
  if step <= warmup:
    return schedule.lr_peak * step / warmup
  progress = min(1.0, (step - warmup) / max(1, total - warmup))
  spread = schedule.lr_peak - schedule.lr_floor
  return schedule.lr_floor + 0.5 * spread * (1.0 + math.cos(math.pi * progress))
