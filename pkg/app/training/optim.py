"""AdamW with decoupled weight decay."""
from __future__ import annotations

import numpy as np

from app.core.errors import NumericError, ShapeError


class AdamWState:
  """Moments, step counter and hyperparameters of one optimizer."""

  def __init__(
    self,
    betas: tuple[float, float] = (0.9, 0.999),
    eps: float = 1e-8,
    weight_decay: float = 0.0,
  ) -> None:
    self.betas = betas
    self.eps = eps
    self.weight_decay = weight_decay
    self.step = 0
    self.m: dict[str, np.ndarray] = {}
    self.v: dict[str, np.ndarray] = {}

  def moments(self, name: str, like: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if name not in self.m:
      return np.zeros_like(like), np.zeros_like(like)
    return self.m[name], self.v[name]


def adamw_step(
  params: dict[str, np.ndarray],
  grads: dict[str, np.ndarray],
  state: AdamWState,
  lr: float,
) -> dict[str, np.ndarray]:
  """One update; moments are replaced in `state` and new parameters returned.

  ``p ← p − lr·m̂/(√v̂ + ε) − lr·wd·p`` with both terms computed from the old p.

  Raises:
      NumericError: a gradient holds NaN or Inf (nothing is updated)
      ShapeError: a gradient does not match its parameter

  """
  bad = sorted(name for name, g in grads.items() if not np.all(np.isfinite(g)))
  if bad:
    error_msg = f"non-finite gradients at step {state.step + 1}: {bad}"
    raise NumericError(error_msg)
  for name, value in params.items():
    if name in grads and grads[name].shape != value.shape:
      error_msg = f"gradient of {name} has shape {grads[name].shape}, expected {value.shape}"
      raise ShapeError(error_msg)

  beta1, beta2 = state.betas
  state.step += 1
  correction1 = 1.0 - beta1 ** state.step
  correction2 = 1.0 - beta2 ** state.step
  updated = {}
  for name, value in params.items():
    grad = grads.get(name)
    if grad is None:
      grad = np.zeros_like(value)
    m, v = state.moments(name, value)
    m = beta1 * m + (1.0 - beta1) * grad
    v = beta2 * v + (1.0 - beta2) * grad * grad
    state.m[name], state.v[name] = m, v
    m_hat = m / correction1
    v_hat = v / correction2
    step = lr * m_hat / (np.sqrt(v_hat) + state.eps)
    updated[name] = (value - step - lr * state.weight_decay * value).astype(value.dtype)
  return updated
