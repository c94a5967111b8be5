"""Segment-based frame sampling."""
from __future__ import annotations

from typing import Literal

import numpy as np

from app.core.errors import DataError

Mode = Literal["train", "test"]


def split_bounds(clip_length: int, num_frames: int) -> list[tuple[int, int]]:
  """Half-open bounds of T near-equal contiguous splits of [0, clip_length)."""
  edges = [i * clip_length // num_frames for i in range(num_frames + 1)]
  return list(zip(edges, edges[1:]))


def sample_frames(
  clip_length: int,
  mode: Mode,
  num_frames: int = 16,
  rng: np.random.Generator | None = None,
) -> list[int]:
  """One frame index per split.

  Train mode draws uniformly inside each split, test mode takes the split
  centre ⌊(lo+hi−1)/2⌋. Clips shorter than T repeat frames with index
  ⌊i·clip_length/T⌋.
  """
  if clip_length < 1:
    error_msg = f"clip length must be >= 1, got {clip_length}"
    raise DataError(error_msg)
  if clip_length < num_frames:
    return [i * clip_length // num_frames for i in range(num_frames)]
  bounds = split_bounds(clip_length, num_frames)
  if mode == "test":
    return [(lo + hi - 1) // 2 for lo, hi in bounds]
  if rng is None:
    error_msg = "train-mode sampling needs a generator"
    raise DataError(error_msg)
  return [int(rng.integers(lo, hi)) for lo, hi in bounds]
