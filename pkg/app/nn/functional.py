"""Differentiable primitives.

Every function takes and returns `Tensor` objects; plain floats and arrays
are promoted to constants of the other operand's precision.
"""
from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from app.core.errors import LabelError, NumericError, ShapeError
from app.nn.tensor import Tensor, apply


def _as_tensor(value: Tensor | float | np.ndarray, like: Tensor) -> Tensor:
  if isinstance(value, Tensor):
    return value
  return Tensor(np.asarray(value, dtype=like.data.dtype))


def _pair(
  a: Tensor | float | np.ndarray, b: Tensor | float | np.ndarray,
) -> tuple[Tensor, Tensor]:
  if isinstance(a, Tensor):
    return a, _as_tensor(b, a)
  return _as_tensor(a, b), b


def unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
  """Sum `grad` down to `shape`, undoing numpy broadcasting."""
  while grad.ndim > len(shape):
    grad = grad.sum(axis=0)
  for axis, size in enumerate(shape):
    if size == 1 and grad.shape[axis] != 1:
      grad = grad.sum(axis=axis, keepdims=True)
  return grad


def add(a: Tensor | float, b: Tensor | float) -> Tensor:
  a, b = _pair(a, b)
  return apply(
    "add", (a, b), np.add,
    lambda g, _: (unbroadcast(g, a.shape), unbroadcast(g, b.shape)),
  )


def sub(a: Tensor | float, b: Tensor | float) -> Tensor:
  a, b = _pair(a, b)
  return apply(
    "sub", (a, b), np.subtract,
    lambda g, _: (unbroadcast(g, a.shape), unbroadcast(-g, b.shape)),
  )


def mul(a: Tensor | float, b: Tensor | float) -> Tensor:
  a, b = _pair(a, b)
  return apply(
    "mul", (a, b), np.multiply,
    lambda g, _: (unbroadcast(g * b.data, a.shape), unbroadcast(g * a.data, b.shape)),
  )


def scale(a: Tensor, k: float) -> Tensor:
  """Multiply by a python constant."""
  return apply("scale", (a,), lambda x: x * k, lambda g, _: (g * k,))


def matmul(a: Tensor, b: Tensor) -> Tensor:
  """Matrix product of an m×k and a k×n tensor."""
  if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
    msg = f"matmul: cannot multiply {a.shape} by {b.shape}"
    raise ShapeError(msg)
  return apply(
    "matmul", (a, b), np.matmul,
    lambda g, _: (g @ b.data.T, a.data.T @ g),
  )


def transpose(a: Tensor) -> Tensor:
  if a.ndim != 2:
    msg = f"transpose expects a matrix, got shape {a.shape}"
    raise ShapeError(msg)
  return apply("transpose", (a,), np.transpose, lambda g, _: (g.T,))


def reshape(a: Tensor, shape: tuple[int, ...]) -> Tensor:
  original = a.shape
  if int(np.prod(shape)) != a.size:
    msg = f"reshape: cannot view {original} as {shape}"
    raise ShapeError(msg)
  return apply(
    "reshape", (a,), lambda x: x.reshape(shape), lambda g, _: (g.reshape(original),),
  )


def take(a: Tensor, index: object) -> Tensor:
  """Basic (slice/int) indexing."""
  def backward(g: np.ndarray, _: np.ndarray) -> tuple[np.ndarray]:
    full = np.zeros_like(a.data)
    full[index] = g
    return (full,)

  return apply("take", (a,), lambda x: x[index], backward)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
  """Join tensors along an existing axis."""
  tensors = tuple(tensors)
  reference = tensors[0].shape
  for t in tensors[1:]:
    if t.ndim != len(reference) or any(
      s != r for i, (s, r) in enumerate(zip(t.shape, reference, strict=True))
      if i != axis % len(reference)
    ):
      msg = f"concat: shapes {reference} and {t.shape} differ off axis {axis}"
      raise ShapeError(msg)
  bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

  return apply(
    "concat", tensors,
    lambda *xs: np.concatenate(xs, axis=axis),
    lambda g, _: tuple(np.split(g, bounds, axis=axis)),
  )


def _normalise_axes(axes: Sequence[int] | int, ndim: int) -> tuple[int, ...]:
  axes = (axes,) if isinstance(axes, int) else tuple(axes)
  if not axes:
    msg = "mean_pool needs at least one axis"
    raise ShapeError(msg)
  normalised = tuple(axis % ndim if -ndim <= axis < ndim else -1 for axis in axes)
  if -1 in normalised or len(set(normalised)) != len(normalised):
    msg = f"mean_pool: axes {axes} invalid for a {ndim}-axis tensor"
    raise ShapeError(msg)
  return normalised


def mean_pool(x: Tensor, axes: Sequence[int] | int) -> Tensor:
  """Arithmetic mean over `axes`; those axes are removed."""
  axes = _normalise_axes(axes, x.ndim)
  count = int(np.prod([x.shape[axis] for axis in axes]))
  shape = x.shape

  def backward(g: np.ndarray, _: np.ndarray) -> tuple[np.ndarray]:
    return (np.broadcast_to(np.expand_dims(g, axes), shape) / count,)

  return apply("mean_pool", (x,), lambda v: v.mean(axis=axes), backward)


def sum_all(x: Tensor) -> Tensor:
  shape = x.shape
  return apply(
    "sum", (x,), lambda v: np.asarray(v.sum()),
    lambda g, _: (np.broadcast_to(g, shape).copy(),),
  )


def affine(x: Tensor, W: Tensor, b: Tensor) -> Tensor:
  """Row-wise ``x @ W + b`` for x of shape n×d_in."""
  if x.ndim != 2 or W.ndim != 2 or b.ndim != 1 or x.shape[1] != W.shape[0] or (
    W.shape[1] != b.shape[0]
  ):
    msg = f"affine: input {x.shape} incompatible with weight {W.shape} / bias {b.shape}"
    raise ShapeError(msg)
  return apply(
    "affine", (x, W, b),
    lambda xv, wv, bv: xv @ wv + bv,
    lambda g, _: (g @ W.data.T, x.data.T @ g, g.sum(axis=0)),
  )


def _stable_sigmoid(x: np.ndarray) -> np.ndarray:
  e = np.exp(-np.abs(x))
  return np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def sigmoid(x: Tensor) -> Tensor:
  return apply(
    "sigmoid", (x,), _stable_sigmoid, lambda g, out: (g * out * (1.0 - out),),
  )


def tanh(x: Tensor) -> Tensor:
  return apply("tanh", (x,), np.tanh, lambda g, out: (g * (1.0 - out * out),))


def relu(x: Tensor) -> Tensor:
  return apply(
    "relu", (x,), lambda v: np.maximum(v, 0.0), lambda g, _: (g * (x.data > 0),),
  )


def _softmax(v: np.ndarray) -> np.ndarray:
  shifted = v - v.max(axis=-1, keepdims=True)
  e = np.exp(shifted)
  return e / e.sum(axis=-1, keepdims=True)


def softmax_rows(x: Tensor) -> Tensor:
  """Softmax over the last axis of a matrix, with row-max subtraction."""
  if x.ndim != 2:
    msg = f"softmax_rows expects a matrix, got shape {x.shape}"
    raise ShapeError(msg)
  if np.isnan(x.data).any():
    msg = "softmax_rows input holds NaN"
    raise NumericError(msg)

  def backward(g: np.ndarray, out: np.ndarray) -> tuple[np.ndarray]:
    return (out * (g - (g * out).sum(axis=1, keepdims=True)),)

  return apply("softmax_rows", (x,), _softmax, backward)


def cross_entropy(logits: Tensor, label: int) -> Tensor:
  """``-log softmax(logits)[label]`` for a length-C logit vector."""
  if logits.ndim != 1:
    msg = f"cross_entropy expects a logit vector, got shape {logits.shape}"
    raise ShapeError(msg)
  num_classes = logits.shape[0]
  if not 0 <= label < num_classes:
    msg = f"label {label} outside [0, {num_classes})"
    raise LabelError(msg)

  def forward(v: np.ndarray) -> np.ndarray:
    top = v.max()
    return np.asarray(top + np.log(np.exp(v - top).sum()) - v[label])

  def backward(g: np.ndarray, _: np.ndarray) -> tuple[np.ndarray]:
    grad = _softmax(logits.data)
    grad[label] -= 1.0
    return (g * grad,)

  return apply("cross_entropy", (logits,), forward, backward)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
  """Normalise the last axis to zero mean / unit variance, then scale and shift."""
  width = x.shape[-1]
  if gamma.shape != (width,) or beta.shape != (width,):
    msg = f"layer_norm: scale {gamma.shape} / shift {beta.shape} vs width {width}"
    raise ShapeError(msg)

  def normalise(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    centred = v - v.mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt((centred * centred).mean(axis=-1, keepdims=True) + eps)
    return centred * inv_std, inv_std

  def forward(v: np.ndarray, gv: np.ndarray, bv: np.ndarray) -> np.ndarray:
    return normalise(v)[0] * gv + bv

  def backward(g: np.ndarray, _: np.ndarray) -> tuple[np.ndarray, ...]:
    xhat, inv_std = normalise(x.data)
    lead = tuple(range(g.ndim - 1))
    gx_hat = g * gamma.data
    gx = inv_std * (
      gx_hat
      - gx_hat.mean(axis=-1, keepdims=True)
      - xhat * (gx_hat * xhat).mean(axis=-1, keepdims=True)
    )
    return gx, (g * xhat).sum(axis=lead), g.sum(axis=lead)

  return apply("layer_norm", (x, gamma, beta), forward, backward)


def conv2d(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
  """Stride-1 'same' convolution of N×Ci×H×W by Co×Ci×k×k (odd k)."""
  if x.ndim != 4 or w.ndim != 4 or w.shape[1] != x.shape[1] or w.shape[2] != w.shape[3]:
    msg = f"conv2d: input {x.shape} incompatible with kernel {w.shape}"
    raise ShapeError(msg)
  if b.shape != (w.shape[0],):
    msg = f"conv2d: bias {b.shape} vs {w.shape[0]} output channels"
    raise ShapeError(msg)
  k = w.shape[2]
  pad = k // 2
  _, _, height, width = x.shape

  def padded(v: np.ndarray) -> np.ndarray:
    return np.pad(v, ((0, 0), (0, 0), (pad, pad), (pad, pad)))

  def forward(xv: np.ndarray, wv: np.ndarray, bv: np.ndarray) -> np.ndarray:
    xp = padded(xv)
    out = np.zeros((xv.shape[0], wv.shape[0], height, width), dtype=xv.dtype)
    for dy in range(k):
      for dx in range(k):
        patch = xp[:, :, dy:dy + height, dx:dx + width]
        out += np.einsum("nchw,oc->nohw", patch, wv[:, :, dy, dx])
    return out + bv[None, :, None, None]

  def backward(g: np.ndarray, _: np.ndarray) -> tuple[np.ndarray, ...]:
    xp = padded(x.data)
    gxp = np.zeros_like(xp)
    gw = np.zeros_like(w.data)
    for dy in range(k):
      for dx in range(k):
        patch = xp[:, :, dy:dy + height, dx:dx + width]
        gw[:, :, dy, dx] = np.einsum("nohw,nchw->oc", g, patch)
        gxp[:, :, dy:dy + height, dx:dx + width] += np.einsum(
          "nohw,oc->nchw", g, w.data[:, :, dy, dx],
        )
    return gxp[:, :, pad:pad + height, pad:pad + width], gw, g.sum(axis=(0, 2, 3))

  return apply("conv2d", (x, w, b), forward, backward)


def avg_pool2d(x: Tensor, k: int | tuple[int, int]) -> Tensor:
  """Non-overlapping average pooling of the two trailing axes.

  `k` is a square window side or a (kh, kw) pair; the stride equals the window.
  """
  kh, kw = (k, k) if isinstance(k, int) else k
  if x.ndim != 4 or x.shape[2] % kh or x.shape[3] % kw:
    msg = f"avg_pool2d: spatial size {x.shape[2:]} not divisible by {(kh, kw)}"
    raise ShapeError(msg)
  n, c, height, width = x.shape

  def forward(v: np.ndarray) -> np.ndarray:
    return v.reshape(n, c, height // kh, kh, width // kw, kw).mean(axis=(3, 5))

  def backward(g: np.ndarray, _: np.ndarray) -> tuple[np.ndarray]:
    return (np.repeat(np.repeat(g, kh, axis=2), kw, axis=3) / (kh * kw),)

  return apply("avg_pool2d", (x,), forward, backward)


def attend(
  query: Tensor, keys: Tensor, values: Tensor, residual: Tensor,
) -> tuple[Tensor, Tensor]:
  """``softmax_rows(query @ keysᵀ) @ values + residual`` (no 1/√d scaling).

  Returns:
      The attended output and the row-stochastic weight matrix.

  """
  if query.shape[1] != keys.shape[1] or keys.shape[0] != values.shape[0] or (
    residual.shape != (query.shape[0], values.shape[1])
  ):
    msg = (
      f"attend: query {query.shape}, keys {keys.shape}, values {values.shape}, "
      f"residual {residual.shape} do not agree"
    )
    raise ShapeError(msg)
  weights = softmax_rows(matmul(query, transpose(keys)))
  return add(matmul(weights, values), residual), weights
