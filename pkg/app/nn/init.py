"""Parameter initialisation."""
from __future__ import annotations

import numpy as np

from app.nn.tensor import Precision, Tensor


def uniform_fan_in(
  rng: np.random.Generator,
  shape: tuple[int, ...],
  fan_in: int,
  precision: Precision,
  name: str,
) -> Tensor:
  """U(−1/√fan_in, 1/√fan_in), the usual linear-layer default."""
  bound = 1.0 / np.sqrt(max(fan_in, 1))
  values = rng.uniform(-bound, bound, size=shape)
  return Tensor(values, requires_grad=True, precision=precision, name=name)


def constant(
  shape: tuple[int, ...], value: float, precision: Precision, name: str,
) -> Tensor:
  return Tensor(
    np.full(shape, value), requires_grad=True, precision=precision, name=name,
  )
