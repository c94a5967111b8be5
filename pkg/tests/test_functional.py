import math

import numpy as np
import pytest

from app.core.errors import LabelError, ShapeError
from app.nn import functional as F
from app.nn.gradcheck import finite_diff_check
from app.nn.tensor import Tape, Tensor, apply, backward


def test_broadcast_gradients_are_unbroadcast():
  a = Tensor(np.ones((3, 4)), requires_grad=True)
  b = Tensor(np.ones(4), requires_grad=True)
  with Tape() as tape:
    y = F.sum_all(a * b + b)
  backward(tape, y)
  np.testing.assert_array_equal(b.grad, np.full(4, 6.0))
  np.testing.assert_array_equal(a.grad, np.ones((3, 4)))


def test_matmul_shape_mismatch():
  with pytest.raises(ShapeError):
    F.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))


def test_mean_pool_rejects_bad_axes():
  x = Tensor(np.ones((2, 3)))
  with pytest.raises(ShapeError):
    F.mean_pool(x, 2)
  with pytest.raises(ShapeError):
    F.mean_pool(x, (0, 0))
  np.testing.assert_array_equal(F.mean_pool(x, -1).data, [1.0, 1.0])


def test_softmax_rows_sum_to_one_and_survive_large_inputs():
  x = Tensor([[1000.0, 1000.0], [0.0, math.log(3.0)]])
  out = F.softmax_rows(x).data
  np.testing.assert_allclose(out.sum(axis=1), 1.0)
  np.testing.assert_allclose(out, [[0.5, 0.5], [0.25, 0.75]])


def test_cross_entropy_values_and_label_range():
  assert F.cross_entropy(Tensor(np.zeros(4)), 2).item() == pytest.approx(math.log(4.0))
  assert F.cross_entropy(Tensor([0.0, 50.0, 0.0]), 1).item() < 1e-20
  with pytest.raises(LabelError):
    F.cross_entropy(Tensor(np.zeros(3)), 3)
  with pytest.raises(LabelError):
    F.cross_entropy(Tensor(np.zeros(3)), -1)


def test_cross_entropy_gradient_is_softmax_minus_onehot(rng):
  logits = Tensor(rng.normal(size=5), requires_grad=True)
  with Tape() as tape:
    loss = F.cross_entropy(logits, 3)
  backward(tape, loss)
  expected = np.exp(logits.data) / np.exp(logits.data).sum()
  expected[3] -= 1.0
  np.testing.assert_allclose(logits.grad, expected, atol=1e-12)


def test_layer_norm_normalises_last_axis(rng):
  x = Tensor(rng.normal(size=(3, 6)) * 5 + 2)
  out = F.layer_norm(x, Tensor(np.ones(6)), Tensor(np.zeros(6))).data
  np.testing.assert_allclose(out.mean(axis=1), 0.0, atol=1e-12)
  np.testing.assert_allclose(out.var(axis=1), 1.0, atol=1e-4)


def test_conv2d_identity_kernel_and_same_padding(rng):
  x = Tensor(rng.normal(size=(2, 3, 5, 5)))
  kernel = np.zeros((3, 3, 3, 3))
  for c in range(3):
    kernel[c, c, 1, 1] = 1.0
  out = F.conv2d(x, Tensor(kernel), Tensor(np.zeros(3)))
  np.testing.assert_allclose(out.data, x.data)


def test_conv2d_border_sees_zero_padding():
  x = Tensor(np.ones((1, 1, 3, 3)))
  out = F.conv2d(x, Tensor(np.ones((1, 1, 3, 3))), Tensor([0.0])).data[0, 0]
  np.testing.assert_array_equal(out, [[4, 6, 4], [6, 9, 6], [4, 6, 4]])


def test_avg_pool2d_rectangular_window():
  x = Tensor(np.arange(16.0).reshape(1, 1, 4, 4))
  np.testing.assert_array_equal(F.avg_pool2d(x, (1, 2)).data[0, 0, 0], [0.5, 2.5])
  with pytest.raises(ShapeError):
    F.avg_pool2d(x, 3)


def test_attend_rows_are_convex_combinations(rng):
  q, k, v = (Tensor(rng.normal(size=s)) for s in ((4, 3), (6, 3), (6, 2)))
  residual = Tensor(np.zeros((4, 2)))
  out, weights = F.attend(q, k, v, residual)
  assert out.shape == (4, 2)
  np.testing.assert_allclose(weights.data.sum(axis=1), 1.0)
  np.testing.assert_allclose(out.data, weights.data @ v.data)


def test_concat_and_take_gradients(rng):
  def function(a, b):
    joined = F.concat([a, b], axis=1)
    return F.sum_all(joined[:, 1:4] * joined[:, 1:4])

  error = finite_diff_check(function, [rng.normal(size=(2, 2)), rng.normal(size=(2, 3))])
  assert error <= 1e-5


@pytest.mark.parametrize("name", ["sigmoid", "tanh", "relu"])
def test_activation_gradients(rng, name):
  op = getattr(F, name)
  weights = rng.normal(size=(3, 4))
  point = rng.normal(size=(3, 4))
  error = finite_diff_check(lambda x: F.sum_all(op(x) * Tensor(weights)), [point])
  assert error <= 1e-5


def test_finite_diff_check_flags_a_wrong_gradient(rng):
  def doubled(x):
    return apply("bad_square", (x,), lambda v: v * v, lambda g, _: (g * 4.0 * x.data,))

  error = finite_diff_check(lambda x: F.sum_all(doubled(x)), [rng.normal(size=5) + 3.0])
  assert error > 0.1


def test_finite_diff_check_samples_coordinates(rng):
  point = rng.normal(size=(20, 20))
  error = finite_diff_check(
    lambda x: F.sum_all(F.tanh(x)), [point], max_coords=10, rng=np.random.default_rng(1),
  )
  assert error <= 1e-5
