"""Central finite-difference verification of analytic gradients."""
from __future__ import annotations

from collections.abc import Callable, Sequence

import numpy as np

from app.core.errors import NumericError, ShapeError
from app.nn.tensor import Precision, Tape, Tensor, backward, no_tape


def _evaluate(
  function: Callable[..., Tensor], arrays: Sequence[np.ndarray],
) -> float:
  with no_tape():
    try:
      value = function(*(Tensor(a, precision=Precision.DOUBLE) for a in arrays))
    except NumericError as err:
      msg = f"function is not finite at a perturbed point: {err}"
      raise NumericError(msg) from err
  result = value.item()
  if not np.isfinite(result):
    msg = "function evaluated to a non-finite value"
    raise NumericError(msg)
  return result


def finite_diff_check(
  function: Callable[..., Tensor],
  point: Sequence[np.ndarray],
  eps: float = 1e-5,
  *,
  max_coords: int | None = None,
  rng: np.random.Generator | None = None,
) -> float:
  """Compare tape gradients of a scalar function with central differences.

  `function` receives one double-precision tensor per entry of `point`.
  The error of one coordinate is ``|analytic − numeric| / max(1, |analytic|)``.

  Args:
      function: scalar-valued function of the tensors in `point`
      point: arrays at which to differentiate
      eps: half-width of the central difference
      max_coords: if set, check at most this many coordinates per array,
        drawn without replacement from `rng`
      rng: generator for coordinate sampling (seed 0 when omitted)

  Returns:
      Maximum relative error over all checked coordinates.

  """
  arrays = [np.array(p, dtype=np.float64) for p in point]
  leaves = [Tensor(a, requires_grad=True, precision=Precision.DOUBLE) for a in arrays]
  with Tape() as tape:
    out = function(*leaves)
  if out.size != 1:
    msg = f"finite_diff_check needs a scalar function, got shape {out.shape}"
    raise ShapeError(msg)
  if out.requires_grad:
    backward(tape, out)

  rng = rng or np.random.default_rng(0)
  worst = 0.0
  for position, (array, leaf) in enumerate(zip(arrays, leaves, strict=True)):
    analytic = leaf.grad if leaf.grad is not None else np.zeros_like(array)
    coords = np.arange(array.size)
    if max_coords is not None and array.size > max_coords:
      coords = np.sort(rng.choice(array.size, size=max_coords, replace=False))
    for flat in coords:
      shifted = list(arrays)
      plus = array.copy()
      plus.flat[flat] += eps
      shifted[position] = plus
      f_plus = _evaluate(function, shifted)
      minus = array.copy()
      minus.flat[flat] -= eps
      shifted[position] = minus
      f_minus = _evaluate(function, shifted)
      numeric = (f_plus - f_minus) / (2.0 * eps)
      exact = float(analytic.flat[flat])
      worst = max(worst, abs(exact - numeric) / max(1.0, abs(exact)))
  return worst
