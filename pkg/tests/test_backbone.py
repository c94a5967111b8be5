import numpy as np
import pytest

from app.core.errors import ConfigError, ShapeError
from app.models.config import BackboneConfig, ModelConfig
from app.nn.tensor import Precision, Tensor
from app.services.backbone import Backbone, channel_broadcast_matrix, stem_factors, temporal_shift
from tests.conftest import dyadic


def shift(array, fraction):
  return temporal_shift(Tensor(array), fraction).data


def test_zero_fraction_is_identity(rng):
  x = rng.normal(size=(3, 4, 2, 2))
  np.testing.assert_array_equal(shift(x, 0.0), x)


def test_single_frame_zeroes_shifted_groups(rng):
  x = rng.normal(size=(1, 8, 2, 2)) + 5.0
  out = shift(x, 0.25)
  assert np.all(out[:, :4] == 0)
  np.testing.assert_array_equal(out[:, 4:], x[:, 4:])


def test_index_arithmetic_two_frames_four_channels():
  x = np.arange(8.0).reshape(2, 4, 1, 1) + 1.0
  out = shift(x, 0.25)
  assert out[0, 0, 0, 0] == x[1, 0, 0, 0]
  assert out[1, 0, 0, 0] == 0.0
  assert out[1, 1, 0, 0] == x[0, 1, 0, 0]
  assert out[0, 1, 0, 0] == 0.0
  np.testing.assert_array_equal(out[:, 2:], x[:, 2:])


def test_shift_is_linear(rng):
  x, y = rng.normal(size=(2, 4, 8, 3, 3))
  expected = 2.0 * shift(x, 0.25) - 3.0 * shift(y, 0.25)
  np.testing.assert_allclose(shift(2.0 * x - 3.0 * y, 0.25), expected)


def test_shift_fraction_out_of_range():
  with pytest.raises(ConfigError):
    temporal_shift(Tensor(np.zeros((2, 4, 1, 1))), 0.6)


def test_channel_broadcast_matrix():
  matrix = channel_broadcast_matrix(3, 5)
  assert matrix.sum(axis=1).tolist() == [1.0] * 5
  assert matrix[4, 1] == 1.0


def test_pooling_only_constant_clip_gives_constant_map():
  config = ModelConfig(backbone=BackboneConfig(
    variant="pooling_only", stage_channels=[8], output_size=(4, 4),
  ))
  model = Backbone(config, precision=Precision.DOUBLE)
  M = model.backbone_forward(Tensor(np.full((2, 3, 8, 8), 0.25)))
  assert M.shape == (2, 8, 4, 4)
  assert np.all(M.data == 0.25)


def test_pooling_only_commutes_with_horizontal_flip(rng):
  config = ModelConfig(backbone=BackboneConfig(
    variant="pooling_only", stage_channels=[8], output_size=(4, 4),
  ))
  model = Backbone(config, precision=Precision.DOUBLE)
  clip = dyadic(rng, (3, 3, 8, 8))
  M = model.backbone_forward(Tensor(clip)).data
  flipped = model.backbone_forward(Tensor(clip[..., ::-1].copy())).data
  np.testing.assert_array_equal(flipped, M[..., ::-1])


def test_desk_shift_cnn_output_is_finite_and_non_negative(rng):
  model = Backbone(ModelConfig())
  M = model.backbone_forward(Tensor(rng.uniform(size=(2, 3, 64, 64)), precision=Precision.SINGLE))
  assert M.shape == (2, 32, 4, 4)
  assert np.all(np.isfinite(M.data))
  assert np.all(M.data >= 0)


def test_stem_factor_and_divisibility():
  config = BackboneConfig()
  assert stem_factors(config, 64, 64) == (2, 2)
  assert stem_factors(config, 32, 64) == (1, 2)
  with pytest.raises(ShapeError):
    stem_factors(config, 30, 30)


def test_wrong_channel_count():
  with pytest.raises(ShapeError):
    Backbone(ModelConfig()).backbone_forward(Tensor(np.zeros((2, 10, 64, 64), dtype=np.float32)))
