"""Clip geometry: bilinear resize, shared crop and whole-clip horizontal flip."""
from __future__ import annotations

import numpy as np

from app.core.errors import DataError
from .sampling import Mode

FLOW_HORIZONTAL_CHANNELS = slice(0, None, 2)


def _interpolation_matrix(in_size: int, out_size: int) -> np.ndarray:
  """out_size×in_size bilinear weights with half-pixel centres."""
  scale = in_size / out_size
  source = np.clip((np.arange(out_size) + 0.5) * scale - 0.5, 0, in_size - 1)
  lower = np.floor(source).astype(int)
  upper = np.minimum(lower + 1, in_size - 1)
  frac = source - lower
  matrix = np.zeros((out_size, in_size))
  rows = np.arange(out_size)
  np.add.at(matrix, (rows, lower), 1.0 - frac)
  np.add.at(matrix, (rows, upper), frac)
  return matrix


def resize_bilinear(frames: np.ndarray, size: tuple[int, int]) -> np.ndarray:
  """Resize the trailing (H, W) axes of a T×C×H×W array to `size` = (W, H)."""
  width, height = size
  if frames.shape[-2:] == (height, width):
    return frames
  rows = _interpolation_matrix(frames.shape[-2], height)
  cols = _interpolation_matrix(frames.shape[-1], width)
  resized = np.einsum("yh,tchw,xw->tcyx", rows, frames, cols)
  return resized.astype(frames.dtype)


def crop(frames: np.ndarray, top: int, left: int, side: int) -> np.ndarray:
  """Same square window on every frame."""
  height, width = frames.shape[-2:]
  if side > min(height, width):
    error_msg = f"crop {side} larger than frame {height}x{width}"
    raise DataError(error_msg)
  if not (0 <= top <= height - side and 0 <= left <= width - side):
    error_msg = f"crop origin ({top}, {left}) outside the frame"
    raise DataError(error_msg)
  return frames[..., top:top + side, left:left + side]


def hflip(frames: np.ndarray, *, flow: bool = False) -> np.ndarray:
  """Mirror the width axis; flow stacks also negate their horizontal channels."""
  flipped = frames[..., ::-1].copy()
  if flow:
    flipped[:, FLOW_HORIZONTAL_CHANNELS] *= -1
  return flipped


def crop_offsets(
  height: int, width: int, side: int, mode: Mode, rng: np.random.Generator | None,
) -> tuple[int, int]:
  """Top-left corner: uniform in train mode, centred in test mode."""
  if mode == "test":
    return (height - side) // 2, (width - side) // 2
  return int(rng.integers(0, height - side + 1)), int(rng.integers(0, width - side + 1))


def augment(
  frames: np.ndarray,
  mode: Mode,
  rng: np.random.Generator | None,
  resize: tuple[int, int],
  side: int,
  *,
  flow: bool = False,
) -> np.ndarray:
  """Resize to `resize` (W, H), crop `side`×`side`, and flip with p=0.5 in train mode.

  The crop window and the flip decision are drawn once per clip.
  """
  width, height = resize
  if side > min(width, height):
    error_msg = f"crop {side} larger than resized frame {width}x{height}"
    raise DataError(error_msg)
  if mode == "train" and rng is None:
    error_msg = "train-mode augmentation needs a generator"
    raise DataError(error_msg)
  resized = resize_bilinear(frames, resize)
  top, left = crop_offsets(height, width, side, mode, rng)
  out = crop(resized, top, left, side)
  if mode == "train" and rng.random() < 0.5:
    out = hflip(out, flow=flow)
  return np.ascontiguousarray(out)
