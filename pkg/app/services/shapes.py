"""Analytic shape propagation for every named tensor of a StepNet forward."""
from __future__ import annotations

import numpy as np

from app.core.errors import ShapeError
from app.core.setup_logging import logger
from app.models.config import ExperimentConfig
from app.models.verification import ShapeRow
from app.nn.tensor import Tensor, no_tape
from .backbone import stem_factors
from .interfaces import StepNet
from .temporal import plan_segments

# Reference shapes at T=16, C=2048, H'=W'=16, N=3, L=8.
REFERENCE_SHAPES: dict[str, tuple[int, ...]] = {
  "M": (16, 2048, 16, 16),
  "h_l": (16, 2048),
  "h_r": (16, 2048),
  "h_t": (16, 2048),
  "h_b": (16, 2048),
  "g_lr": (16, 2048),
  "g_tb": (16, 2048),
  "g_sg": (16, 2048),
  "f_s": (16, 1024),
  "g_1": (8, 1024),
  "g_2": (8, 1024),
  "g_3": (8, 1024),
  "g_t": (16, 2048),
  "f_t": (16, 1024),
  "f_st": (16, 2048),
}


def propagate_shapes(config: ExperimentConfig) -> dict[str, tuple[int, ...]]:
  """Shapes of M and every part feature, without allocating any tensor.

  Raises:
      ShapeError: the crop size does not reduce to the backbone output size.
      ConfigError: the segment plan is infeasible.

  """
  model = config.model
  backbone = model.backbone
  frames, crop = config.data.num_frames, config.data.crop
  stem_factors(backbone, crop, crop)
  out_h, out_w = backbone.output_size
  c, d = model.channels, model.d

  shapes: dict[str, tuple[int, ...]] = {"M": (frames, c, out_h, out_w), "g_sg": (frames, c)}
  if model.global_only:
    return shapes
  if model.use_spatial:
    if model.partitions in ("both", "lr"):
      shapes.update(h_l=(frames, c), h_r=(frames, c), g_lr=(frames, c))
    if model.partitions in ("both", "tb"):
      shapes.update(h_t=(frames, c), h_b=(frames, c), g_tb=(frames, c))
  shapes["f_s"] = (frames, d)
  if model.use_temporal:
    plan = plan_segments(frames, model.segment_count, model.segment_length)
    for index in range(1, plan.num_segments + 1):
      shapes[f"g_{index}"] = (plan.length, model.d_seg)
    shapes["g_t"] = (frames, model.d_glob)
  shapes["f_t"] = (frames, d)
  shapes["f_st"] = (frames, model.d_out)
  return shapes


def shape_report(
  config: ExperimentConfig, reference: dict[str, tuple[int, ...]] | None = None,
) -> list[ShapeRow]:
  """Propagated shapes as report rows, compared against `reference` when given."""
  reference = reference or {}
  return [
    ShapeRow(name=name, shape=shape, expected=reference.get(name))
    for name, shape in propagate_shapes(config).items()
  ]


def param_count(config: ExperimentConfig) -> int:
  """Scalar parameters implied by the model section (nothing is allocated)."""
  return StepNet(config.model, materialize=False).param_count()


def check_forward_shapes(config: ExperimentConfig, seed: int = 0) -> dict[str, tuple[int, ...]]:
  """Run one real forward at the configured size and compare with propagation.

  Only intended for desk-scale configs.

  Raises:
      ShapeError: a computed tensor disagrees with its propagated shape.

  """
  data = config.data
  backbone = config.model.backbone
  rng = np.random.default_rng(seed)
  clip = Tensor(
    rng.uniform(size=(data.num_frames, backbone.in_channels, data.crop, data.crop)),
    precision=config.precision,
  )
  model = StepNet(config.model, precision=config.precision, seed=seed)
  with no_tape():
    features, _ = model.forward(clip)
  actual = features.named_shapes()
  expected = propagate_shapes(config)
  mismatched = {
    name: (actual.get(name), shape)
    for name, shape in expected.items()
    if actual.get(name) != shape
  }
  if mismatched:
    error_msg = f"forward shapes disagree with propagation: {mismatched}"
    raise ShapeError(error_msg)
  logger.debug(f"Forward shapes agree with propagation for {len(expected)} tensors")
  return actual
