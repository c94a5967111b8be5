"""Finite-difference gradient suite over the primitives and the full model."""
from __future__ import annotations

from collections.abc import Callable, Iterator

import numpy as np

from app.core.setup_logging import logger
from app.models.config import BackboneConfig, ExperimentConfig, ModelConfig
from app.models.presets import preset
from app.models.verification import GradcheckEntry, GradcheckReport
from app.nn import functional as F
from app.nn.gradcheck import finite_diff_check
from app.nn.recurrent import GRUParams, gru_cell, gru_sequence
from app.nn.tensor import Precision, Tensor
from .backbone import Backbone, temporal_shift
from .heads import classify
from .interfaces import StepNet
from .spatial import GateParams, gate

PRIMITIVE_TOLERANCE = 1e-5
COMPOSITE_TOLERANCE = 1e-4
PRIMITIVE_POINTS = 10

Case = tuple[str, float, Callable[..., Tensor], list[np.ndarray], int | None]


def _weighted_sum(out: Tensor, weights: np.ndarray) -> Tensor:
  """Reduce any output to a scalar with fixed random weights."""
  return F.sum_all(out * Tensor(weights.reshape(out.shape), precision=out.precision))


def _primitive_cases(rng: np.random.Generator) -> Iterator[Case]:
  def normal(*shape: int) -> np.ndarray:
    return rng.normal(size=shape)

  def reduced(op: Callable[..., Tensor], out_size: int) -> Callable[..., Tensor]:
    weights = normal(out_size)
    return lambda *xs: _weighted_sum(op(*xs), weights)

  tol = PRIMITIVE_TOLERANCE
  yield "add", tol, reduced(F.add, 12), [normal(3, 4), normal(1, 4)], None
  yield "sub", tol, reduced(F.sub, 12), [normal(3, 4), normal(3, 1)], None
  yield "mul", tol, reduced(F.mul, 12), [normal(3, 4), normal(4)], None
  yield "matmul", tol, reduced(F.matmul, 10), [normal(2, 3), normal(3, 5)], None
  yield "transpose", tol, reduced(F.transpose, 6), [normal(2, 3)], None
  yield "reshape", tol, reduced(lambda x: F.reshape(x, (3, 4)), 12), [normal(2, 6)], None
  yield "take", tol, reduced(lambda x: x[1:3, ::2], 4), [normal(4, 4)], None
  yield "concat", tol, reduced(lambda a, b: F.concat([a, b], axis=1), 15), [
    normal(3, 2), normal(3, 3),
  ], None
  yield "mean_pool", tol, reduced(lambda x: F.mean_pool(x, (2, 3)), 6), [normal(2, 3, 2, 4)], None
  yield "sum_all", tol, F.sum_all, [normal(3, 3)], None
  yield "affine", tol, reduced(F.affine, 8), [normal(4, 3), normal(3, 2), normal(2)], None
  yield "sigmoid", tol, reduced(F.sigmoid, 8), [normal(2, 4) * 3], None
  yield "tanh", tol, reduced(F.tanh, 8), [normal(2, 4)], None
  yield "relu", tol, reduced(F.relu, 8), [normal(2, 4)], None
  yield "softmax_rows", tol, reduced(F.softmax_rows, 15), [normal(3, 5)], None
  yield "cross_entropy", tol, lambda x: F.cross_entropy(x, 2), [normal(5)], None
  yield "layer_norm", tol, reduced(F.layer_norm, 12), [normal(3, 4), normal(4), normal(4)], None
  yield "conv2d", tol, reduced(F.conv2d, 2 * 3 * 4 * 4), [
    normal(2, 2, 4, 4), normal(3, 2, 3, 3), normal(3),
  ], None
  yield "avg_pool2d", tol, reduced(lambda x: F.avg_pool2d(x, 2), 8), [normal(2, 1, 4, 4)], None
  yield "temporal_shift", tol, reduced(lambda x: temporal_shift(x, 0.25), 64), [
    normal(4, 4, 2, 2),
  ], None


def _gru_point(rng: np.random.Generator, d_in: int, d_h: int) -> list[np.ndarray]:
  shapes = {"W": (d_in, d_h), "U": (d_h, d_h), "b": (d_h,)}
  return [rng.normal(scale=0.5, size=shapes[name[0]]) for name in GRUParams._fields]


def _composite_cases(rng: np.random.Generator) -> Iterator[Case]:
  tol = COMPOSITE_TOLERANCE
  weights = rng.normal(size=64)

  yield "gru_cell", tol, lambda x, h, *p: _weighted_sum(
    gru_cell(x, h, GRUParams(*p)), weights[:4],
  ), [rng.normal(size=3), rng.normal(size=4), *_gru_point(rng, 3, 4)], None

  yield "gru_sequence", tol, lambda x, *p: _weighted_sum(
    gru_sequence(x, GRUParams(*p)), weights[:20],
  ), [rng.normal(size=(5, 3)), *_gru_point(rng, 3, 4)], None

  yield "gate", tol, lambda h, *p: _weighted_sum(gate(h, GateParams(*p)), weights[:24]), [
    rng.normal(size=(3, 8)), rng.normal(size=(8, 2)), rng.normal(size=2),
    rng.normal(size=(2, 8)), rng.normal(size=8),
  ], None

  def attention(q: Tensor, k: Tensor, v: Tensor, r: Tensor) -> Tensor:
    return _weighted_sum(F.attend(q, k, v, r)[0], weights[:12])

  yield "attend", tol, attention, [
    rng.normal(size=(4, 3)), rng.normal(size=(6, 3)), rng.normal(size=(6, 3)),
    rng.normal(size=(4, 3)),
  ], None

  yield "classify", tol, lambda f, w, b: _weighted_sum(classify(f, w, b), weights[:3]), [
    rng.normal(size=(4, 5)), rng.normal(size=(5, 3)), rng.normal(size=3),
  ], None

  backbone = Backbone(
    ModelConfig(backbone=BackboneConfig(
      stage_channels=[4, 4], shift_fraction=0.5, output_size=(2, 2),
    )),
    precision=Precision.DOUBLE,
  )
  names = sorted(backbone.params)

  def backbone_loss(clip: Tensor, *params: Tensor) -> Tensor:
    model = backbone.replace_params(dict(zip(names, params, strict=True)))
    return _weighted_sum(model.backbone_forward(clip), weights[:32])

  yield "backbone_forward[shift_cnn]", tol, backbone_loss, [
    rng.uniform(size=(2, 3, 8, 8)), *(backbone.params[n].data for n in names),
  ], None


def full_model_case(
  config: ExperimentConfig, rng: np.random.Generator, max_coords: int | None = 8,
) -> Case:
  """clip → total_loss over the input clip and every parameter."""
  model = StepNet(config.model, precision=Precision.DOUBLE, seed=config.seed)
  names = sorted(model.params)
  backbone = config.model.backbone
  clip = rng.uniform(size=(
    config.data.num_frames, backbone.in_channels, config.data.crop, config.data.crop,
  ))
  label = int(rng.integers(config.model.num_classes))

  def loss(clip_tensor: Tensor, *params: Tensor) -> Tensor:
    clone = model.replace_params(dict(zip(names, params, strict=True)))
    return clone.loss(clip_tensor, label)

  point = [clip, *(model.params[n].data for n in names)]
  return "stepnet_total_loss", COMPOSITE_TOLERANCE, loss, point, max_coords


def run_gradcheck_suite(
  seed: int = 0,
  *,
  eps: float = 1e-5,
  full_model_coords: int | None = 8,
  primitive_points: int = PRIMITIVE_POINTS,
) -> GradcheckReport:
  """Check every primitive, the building blocks and the gradcheck-preset model.

  Args:
      seed: seed of the test points and coordinate sampling
      eps: finite-difference half-width
      full_model_coords: coordinates sampled per array of the full model
        (None checks every coordinate)
      primitive_points: random points per primitive; its entry keeps the
        worst error

  Returns:
      GradcheckReport with one entry per function.

  """
  rng = np.random.default_rng(seed)
  report = GradcheckReport()

  def record(name: str, tolerance: float, error: float) -> None:
    report.entries.append(GradcheckEntry(name=name, max_rel_error=error, tolerance=tolerance))
    logger.debug(f"gradcheck {name}: {error:.3e} (tolerance {tolerance:.0e})")

  rounds = [list(_primitive_cases(rng)) for _ in range(primitive_points)]
  for same_primitive in zip(*rounds, strict=True):
    name, tolerance = same_primitive[0][:2]
    error = max(
      finite_diff_check(function, point, eps, max_coords=max_coords, rng=rng)
      for _, _, function, point, max_coords in same_primitive
    )
    record(name, tolerance, error)
  for name, tolerance, function, point, max_coords in [
    *_composite_cases(rng),
    full_model_case(preset("gradcheck"), rng, full_model_coords),
  ]:
    record(name, tolerance, finite_diff_check(function, point, eps, max_coords=max_coords, rng=rng))
  logger.info(
    f"Gradient suite: {len(report.entries)} checks, max relative error {report.max_error:.3e}",
  )
  return report
