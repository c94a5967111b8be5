"""Gated recurrent unit built from substrate primitives.

Cell equations (update gate z, reset gate r, candidate ĥ)::

    z  = σ(W_z x + U_z h + b_z)
    r  = σ(W_r x + U_r h + b_r)
    ĥ  = tanh(W_h x + U_h (r ⊙ h) + b_h)
    h' = (1 − z) ⊙ h + z ⊙ ĥ

Weights act on row vectors: ``x @ W_z`` with W_z of shape d_in×d_h.
"""
from __future__ import annotations

from typing import NamedTuple

from app.core.errors import ShapeError
from app.nn import functional as F
from app.nn.tensor import Tensor


class GRUParams(NamedTuple):
  """Weights of one GRU; W_* are d_in×d_h, U_* are d_h×d_h, b_* are d_h."""

  W_z: Tensor
  U_z: Tensor
  b_z: Tensor
  W_r: Tensor
  U_r: Tensor
  b_r: Tensor
  W_h: Tensor
  U_h: Tensor
  b_h: Tensor

  @property
  def input_width(self) -> int:
    return self.W_z.shape[0]

  @property
  def hidden_width(self) -> int:
    return self.U_z.shape[0]

  def check(self) -> None:
    """Raise ShapeError unless every weight agrees with (d_in, d_h)."""
    d_in, d_h = self.input_width, self.hidden_width
    expected = {
      "W": (d_in, d_h),
      "U": (d_h, d_h),
      "b": (d_h,),
    }
    for name, tensor in zip(self._fields, self, strict=True):
      if tensor.shape != expected[name[0]]:
        msg = f"GRU weight {name} has shape {tensor.shape}, expected {expected[name[0]]}"
        raise ShapeError(msg)


def _step(
  xz: Tensor, xr: Tensor, xh: Tensor, h: Tensor, params: GRUParams,
) -> Tensor:
  z = F.sigmoid(xz + h @ params.U_z)
  r = F.sigmoid(xr + h @ params.U_r)
  candidate = F.tanh(xh + (r * h) @ params.U_h)
  return h + z * (candidate - h)


def gru_cell(x: Tensor, h_prev: Tensor, params: GRUParams) -> Tensor:
  """Advance one step; `x` is 1×d_in (or d_in), `h_prev` is 1×d_h (or d_h)."""
  params.check()
  squeeze = x.ndim == 1
  if squeeze:
    x = F.reshape(x, (1, x.shape[0]))
  if h_prev.ndim == 1:
    h_prev = F.reshape(h_prev, (1, h_prev.shape[0]))
  if x.shape != (1, params.input_width) or h_prev.shape != (1, params.hidden_width):
    msg = (
      f"gru_cell: input {x.shape} / state {h_prev.shape} vs "
      f"(d_in={params.input_width}, d_h={params.hidden_width})"
    )
    raise ShapeError(msg)
  h_next = _step(
    F.affine(x, params.W_z, params.b_z),
    F.affine(x, params.W_r, params.b_r),
    F.affine(x, params.W_h, params.b_h),
    h_prev,
    params,
  )
  return F.reshape(h_next, (params.hidden_width,)) if squeeze else h_next


def gru_sequence(sequence: Tensor, params: GRUParams) -> Tensor:
  """Run the GRU over the rows of an L×d_in sequence from a zero state.

  Input projections for every step are computed with one affine each; the
  result is the full L×d_h hidden sequence.
  """
  params.check()
  if sequence.ndim != 2 or sequence.shape[1] != params.input_width:
    msg = f"gru_sequence: sequence {sequence.shape} vs d_in={params.input_width}"
    raise ShapeError(msg)
  xz = F.affine(sequence, params.W_z, params.b_z)
  xr = F.affine(sequence, params.W_r, params.b_r)
  xh = F.affine(sequence, params.W_h, params.b_h)
  h = Tensor(
    [[0.0] * params.hidden_width], precision=sequence.precision,
  )
  states = []
  for t in range(sequence.shape[0]):
    row = slice(t, t + 1)
    h = _step(xz[row], xr[row], xh[row], h, params)
    states.append(h)
  return F.concat(states, axis=0)
