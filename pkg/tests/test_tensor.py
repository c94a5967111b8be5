import numpy as np
import pytest

from app.core.errors import NumericError, PrecisionError, ShapeError, StepNetError
from app.nn import functional as F
from app.nn.tensor import Precision, Tape, Tensor, active_tape, backward, no_tape


def test_tensor_is_read_only_and_typed():
  x = Tensor([1, 2, 3])
  assert x.precision is Precision.DOUBLE
  assert Tensor([1.0], precision=Precision.SINGLE).data.dtype == np.float32
  with pytest.raises(ValueError):
    x.data[0] = 5.0


def test_non_finite_values_are_rejected():
  with pytest.raises(NumericError):
    Tensor([1.0, np.nan])
  big = Tensor([1e308], requires_grad=True)
  with pytest.raises(NumericError), np.errstate(over="ignore"):
    F.scale(big, 10.0)


def test_mixed_precision_raises():
  a = Tensor([1.0], precision=Precision.SINGLE)
  b = Tensor([1.0], precision=Precision.DOUBLE)
  with pytest.raises(PrecisionError):
    a + b


def test_backward_sums_contributions_of_reused_tensor():
  x = Tensor([2.0, 3.0], requires_grad=True)
  with Tape() as tape:
    y = F.sum_all(x * x + x)
  leaves = backward(tape, y)
  assert leaves == [x]
  np.testing.assert_allclose(x.grad, [5.0, 7.0])


def test_backward_accumulates_across_passes():
  x = Tensor([1.0, -1.0], requires_grad=True)
  for _ in range(2):
    with Tape() as tape:
      y = F.sum_all(F.scale(x, 3.0))
    backward(tape, y)
  np.testing.assert_array_equal(x.grad, [6.0, 6.0])
  x.zero_grad()
  assert x.grad is None


def test_two_backward_passes_are_bit_identical(rng):
  w = Tensor(rng.normal(size=(4, 3)), requires_grad=True)
  v = Tensor(rng.normal(size=(5, 4)))
  grads = []
  for _ in range(2):
    w.zero_grad()
    with Tape() as tape:
      loss = F.sum_all(F.tanh(v @ w) * F.sigmoid(v @ w))
    backward(tape, loss)
    grads.append(w.grad.copy())
  assert np.array_equal(grads[0], grads[1])


def test_seed_must_be_scalar_and_on_tape():
  x = Tensor([1.0, 2.0], requires_grad=True)
  with Tape() as tape:
    y = x * 2.0
  with pytest.raises(ShapeError):
    backward(tape, y)
  with Tape() as other:
    z = F.sum_all(x)
  with pytest.raises(StepNetError):
    backward(tape, z)
  assert len(other) == 1


def test_nothing_recorded_without_tape_or_gradients():
  x = Tensor([1.0], requires_grad=True)
  constant = Tensor([2.0])
  assert active_tape() is None
  with Tape() as tape:
    constant * constant
    with no_tape():
      x * x
    assert active_tape() is tape
  assert len(tape) == 0
  assert (x * x).is_leaf


def test_replay_reproduces_every_node(rng):
  x = Tensor(rng.normal(size=(3, 4)), requires_grad=True)
  with Tape() as tape:
    F.sum_all(F.softmax_rows(x) * F.relu(x))
  assert len(tape) == 4
  assert tape.replay()


def test_shared_subexpression_gradient_matches_closed_form():
  x = Tensor([0.5], requires_grad=True)
  with Tape() as tape:
    s = F.sigmoid(x)
    y = F.sum_all(s * s)
  backward(tape, y)
  sig = 1.0 / (1.0 + np.exp(-0.5))
  np.testing.assert_allclose(x.grad, [2 * sig * sig * (1 - sig)], rtol=1e-12)
