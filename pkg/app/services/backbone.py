"""Miniature backbones producing the coarse feature map M."""
from __future__ import annotations

import math

import numpy as np

from app.core.errors import ConfigError, ShapeError
from app.models.config import BackboneConfig, BackboneVariant
from app.nn import functional as F
from app.nn.tensor import Tensor, apply
from .base import ModelBase, ParamSpec


def temporal_shift(x: Tensor, fraction: float) -> Tensor:
  """Shift channel groups of a T×C×H×W tensor one step along time.

  The first ⌊C·fraction⌋ channels move one step toward earlier time (frame t
  receives frame t+1), the next ⌊C·fraction⌋ one step toward later time;
  vacated positions are zero and the remaining channels are untouched.
  """
  if not 0.0 <= fraction <= 0.5:
    error_msg = f"shift fraction {fraction} outside [0, 0.5]"
    raise ConfigError(error_msg)
  if x.ndim != 4:
    error_msg = f"temporal_shift expects T×C×H×W, got {x.shape}"
    raise ShapeError(error_msg)
  fold = math.floor(x.shape[1] * fraction)

  def shift(v: np.ndarray) -> np.ndarray:
    out = np.zeros_like(v)
    out[:-1, :fold] = v[1:, :fold]
    out[1:, fold:2 * fold] = v[:-1, fold:2 * fold]
    out[:, 2 * fold:] = v[:, 2 * fold:]
    return out

  def unshift(g: np.ndarray, _: np.ndarray) -> tuple[np.ndarray]:
    grad = np.zeros_like(g)
    grad[1:, :fold] = g[:-1, :fold]
    grad[:-1, fold:2 * fold] = g[1:, fold:2 * fold]
    grad[:, 2 * fold:] = g[:, 2 * fold:]
    return (grad,)

  return apply("temporal_shift", (x,), shift, unshift)


def stem_factors(cfg: BackboneConfig, height: int, width: int) -> tuple[int, int]:
  """Average-pool factors applied before the blocks (the whole stride for pooling_only).

  Raises:
      ShapeError: the input size is not the output size times the block strides.

  """
  out_h, out_w = cfg.output_size
  block_stride = 2 ** len(cfg.stage_channels) if cfg.variant == BackboneVariant.SHIFT_CNN else 1
  factors = []
  for size, out in ((height, out_h), (width, out_w)):
    if size % (out * block_stride):
      error_msg = (
        f"input side {size} not divisible by output side {out} × block stride {block_stride}"
      )
      raise ShapeError(error_msg)
    factors.append(size // (out * block_stride))
  return factors[0], factors[1]


def channel_broadcast_matrix(in_channels: int, out_channels: int) -> np.ndarray:
  """Fixed 1×1 map: output channel o copies input channel o mod C_in."""
  matrix = np.zeros((out_channels, in_channels))
  matrix[np.arange(out_channels), np.arange(out_channels) % in_channels] = 1.0
  return matrix


class Backbone(ModelBase):
  """Backbone operations.

  Available public methods:
    - backbone_forward: clip (T×C_in×H×W) to feature map M (T×C×H'×W')

  """

  def _param_specs(self) -> dict[str, ParamSpec]:
    specs = super()._param_specs()
    cfg = self.config.backbone
    if cfg.variant == BackboneVariant.SHIFT_CNN:
      widths = [cfg.in_channels, *cfg.stage_channels]
      for index, (c_in, c_out) in enumerate(zip(widths, widths[1:])):
        specs[f"backbone.conv{index}.weight"] = ParamSpec((c_out, c_in, 3, 3), c_in * 9)
        specs[f"backbone.conv{index}.bias"] = ParamSpec((c_out,), c_in * 9)
    return specs

  def backbone_forward(self, clip: Tensor) -> Tensor:
    """Compute M from a clip."""
    cfg = self.config.backbone
    if clip.ndim != 4 or clip.shape[1] != cfg.in_channels:
      error_msg = f"clip shape {clip.shape} does not have {cfg.in_channels} channels"
      raise ShapeError(error_msg)
    stem = stem_factors(cfg, clip.shape[2], clip.shape[3])
    x = F.avg_pool2d(clip, stem) if stem != (1, 1) else clip

    if cfg.variant == BackboneVariant.POOLING_ONLY:
      matrix = channel_broadcast_matrix(cfg.in_channels, cfg.out_channels)
      kernel = Tensor(matrix[:, :, None, None], precision=clip.precision)
      bias = Tensor(np.zeros(cfg.out_channels), precision=clip.precision)
      return F.conv2d(x, kernel, bias)

    for index in range(len(cfg.stage_channels)):
      x = temporal_shift(x, cfg.shift_fraction / 2)
      x = F.relu(F.conv2d(
        x, self.p(f"backbone.conv{index}.weight"), self.p(f"backbone.conv{index}.bias"),
      ))
      x = F.avg_pool2d(x, 2)
    return x
