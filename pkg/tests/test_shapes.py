import pytest

from app.core.errors import ConfigError, ShapeError
from app.models.presets import build_config, deep_merge, preset, preset_overlay
from app.models.verification import ShapeRow
from app.services.shapes import (
  REFERENCE_SHAPES,
  check_forward_shapes,
  param_count,
  propagate_shapes,
  shape_report,
)
from tests.conftest import gradcheck_variant


def test_paper_scale_matches_reference_table():
  assert propagate_shapes(preset("paper")) == REFERENCE_SHAPES
  assert all(row.matches for row in shape_report(preset("paper"), REFERENCE_SHAPES))


def test_report_renders_dimensions():
  rows = {row.name: row.render() for row in shape_report(preset("paper"))}
  assert rows["M"] == "M: 16x2048x16x16"
  assert rows["f_st"] == "f_st: 16x2048"
  assert rows["g_2"] == "g_2: 8x1024"


def test_render_flags_disagreement():
  row = ShapeRow(name="f_s", shape=(16, 512), expected=(16, 1024))
  assert not row.matches
  assert row.render() == "f_s: 16x512  (expected 16x1024)"


def test_propagation_agrees_with_forward(gradcheck_config):
  assert check_forward_shapes(gradcheck_config)["M"] == (4, 8, 4, 4)


def test_desk_forward_agrees_with_propagation():
  check_forward_shapes(preset("desk"))


def test_segment_layout_follows_plan():
  shapes = propagate_shapes(preset("tp_4x6"))
  assert [shapes[f"g_{n}"] for n in range(1, 5)] == [(6, 16)] * 4
  assert "g_5" not in shapes


def test_indivisible_crop_is_rejected():
  config = build_config(deep_merge(preset_overlay("gradcheck"), {
    "data": {"resize": [10, 10], "crop": 10},
  }))
  with pytest.raises(ShapeError):
    propagate_shapes(config)


def test_infeasible_segments_are_rejected():
  config = gradcheck_variant(segment_count=5)
  with pytest.raises(ConfigError):
    propagate_shapes(config)


def test_param_count_tracks_switches():
  full = param_count(preset("gradcheck"))
  assert param_count(gradcheck_variant(global_only=True)) < full
  assert param_count(gradcheck_variant(local_temporal_heads=True)) == full + 3 * (4 * 3 + 3)
  assert param_count(preset("paper")) > 10**7
