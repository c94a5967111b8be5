"""Pseudo-flow: a 10-channel frame-difference surrogate for optical flow.

For every output frame, five consecutive grayscale differences around the
source index each give one normal-flow pair::

    u = −I_t·I_x / (I_x² + I_y² + λ)
    v = −I_t·I_y / (I_x² + I_y² + λ)

Channels are interleaved as (u_1, v_1, …, u_5, v_5) and clipped to [−1, 1].
Frame indices outside the clip are clamped to its ends.
"""
from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from app.core.errors import DataError

FLOW_DIFFERENCES = 5
FLOW_CHANNELS = 2 * FLOW_DIFFERENCES
REGULARISER = 1e-2
LUMA = np.array([0.299, 0.587, 0.114])


def grayscale(clip: np.ndarray) -> np.ndarray:
  """T×3×H×W RGB to T×H×W luma."""
  return np.einsum("tchw,c->thw", clip.astype(np.float64), LUMA)


def normal_flow(before: np.ndarray, after: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
  """(u, v) between two grayscale frames, from gradients of their mean."""
  temporal = after - before
  grad_y, grad_x = np.gradient(0.5 * (before + after))
  denominator = grad_x * grad_x + grad_y * grad_y + REGULARISER
  return -temporal * grad_x / denominator, -temporal * grad_y / denominator


def pseudo_flow(clip: np.ndarray, indices: Sequence[int] | None = None) -> np.ndarray:
  """Flow stack (len(indices)×10×H×W) for the given source frames (all by default)."""
  if clip.ndim != 4 or clip.shape[1] != 3:
    error_msg = f"pseudo_flow expects a T×3×H×W clip, got {clip.shape}"
    raise DataError(error_msg)
  length = clip.shape[0]
  indices = range(length) if indices is None else indices
  gray = grayscale(clip)
  last = length - 1
  half = FLOW_DIFFERENCES // 2

  stacks = []
  for t in indices:
    channels = []
    for k in range(-half, FLOW_DIFFERENCES - half):
      before = gray[min(max(t + k, 0), last)]
      after = gray[min(max(t + k + 1, 0), last)]
      channels.extend(normal_flow(before, after))
    stacks.append(np.stack(channels))
  flow = np.clip(np.stack(stacks), -1.0, 1.0)
  return flow.astype(clip.dtype)
