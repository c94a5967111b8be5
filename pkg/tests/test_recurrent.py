import numpy as np
import pytest

from app.core.errors import ShapeError
from app.nn import functional as F
from app.nn.gradcheck import finite_diff_check
from app.nn.recurrent import GRUParams, gru_cell, gru_sequence
from app.nn.tensor import Tensor


def make_params(rng, d_in, d_h, scale=0.5):
  shapes = {"W": (d_in, d_h), "U": (d_h, d_h), "b": (d_h,)}
  return GRUParams(*(
    Tensor(rng.normal(scale=scale, size=shapes[name[0]])) for name in GRUParams._fields
  ))


def test_zero_weights_halve_the_state():
  params = GRUParams(*(
    Tensor(np.zeros(s)) for s in [(2, 3), (3, 3), (3,)] * 3
  ))
  h = Tensor([1.0, -2.0, 4.0])
  out = gru_cell(Tensor([5.0, 5.0]), h, params)
  np.testing.assert_allclose(out.data, [0.5, -1.0, 2.0])


def test_sequence_equals_successive_cells(rng):
  params = make_params(rng, 3, 4)
  sequence = Tensor(rng.normal(size=(6, 3)))
  states = gru_sequence(sequence, params)
  h = Tensor(np.zeros(4))
  for t in range(6):
    h = gru_cell(Tensor(sequence.data[t]), h, params)
    np.testing.assert_allclose(states.data[t], h.data, rtol=0, atol=1e-12)


def test_cell_keeps_row_layout(rng):
  params = make_params(rng, 3, 4)
  out = gru_cell(Tensor(np.ones((1, 3))), Tensor(np.zeros((1, 4))), params)
  assert out.shape == (1, 4)


def test_shape_errors(rng):
  params = make_params(rng, 3, 4)
  with pytest.raises(ShapeError):
    gru_cell(Tensor(np.ones(2)), Tensor(np.zeros(4)), params)
  with pytest.raises(ShapeError):
    gru_sequence(Tensor(np.ones((5, 4))), params)
  broken = params._replace(U_r=Tensor(np.zeros((4, 3))))
  with pytest.raises(ShapeError):
    gru_sequence(Tensor(np.ones((5, 3))), broken)


def test_sequence_gradients(rng):
  shapes = [(3, 4), (4, 4), (4,)] * 3
  point = [rng.normal(size=(5, 3))] + [rng.normal(scale=0.5, size=s) for s in shapes]
  weights = Tensor(rng.normal(size=(5, 4)))

  def function(x, *p):
    return F.sum_all(gru_sequence(x, GRUParams(*p)) * weights)

  assert finite_diff_check(function, point) <= 1e-4
