"""Pydantic models for intermediate features and classifier outputs."""
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.errors import ShapeError
from app.nn.tensor import Tensor

SPATIAL_HEADS = ("q_left", "q_right", "q_top", "q_bottom", "q_lr", "q_tb", "q_sg", "q_s")
HEAD_NAMES = (*SPATIAL_HEADS, "q_temp", "q_st")


class SegmentPlan(BaseModel):
  """Overlapping temporal segments over a clip of T frames."""

  model_config = ConfigDict(frozen=True)

  num_frames: int = Field(..., ge=1, description="T")
  num_segments: int = Field(..., ge=1, description="N")
  length: int = Field(..., ge=1, description="L frames per segment")
  starts: tuple[int, ...] = Field(..., description="Segment start frames")

  @model_validator(mode="after")
  def validate_cover(self) -> "SegmentPlan":
    """Starts are increasing, in range, and the segments cover the clip."""
    last = self.num_frames - self.length
    if len(self.starts) != self.num_segments:
      error_msg = f"{len(self.starts)} starts for {self.num_segments} segments"
      raise ValueError(error_msg)
    if any(s < 0 or s > last for s in self.starts):
      error_msg = f"starts {self.starts} outside [0, {last}]"
      raise ValueError(error_msg)
    if any(a >= b for a, b in zip(self.starts, self.starts[1:])):
      error_msg = f"starts {self.starts} not strictly increasing"
      raise ValueError(error_msg)
    if self.starts[0] != 0 or self.starts[-1] != last:
      error_msg = f"starts {self.starts} do not cover 0..{self.num_frames}"
      raise ValueError(error_msg)
    return self

  @property
  def overlap(self) -> int:
    """Frames shared by the first two segments (0 when N = 1)."""
    if self.num_segments == 1:
      return 0
    return max(0, self.starts[0] + self.length - self.starts[1])


class _TensorModel(BaseModel):
  model_config = ConfigDict(arbitrary_types_allowed=True)


class SpatialParts(_TensorModel):
  """Pooled global and stripe features, each T×C."""

  g_sg: Tensor
  h_l: Tensor
  h_r: Tensor
  h_t: Tensor
  h_b: Tensor


class TemporalFeatures(_TensorModel):
  """Temporal-branch intermediates."""

  pooled: Tensor = Field(..., description="T×C spatially pooled map")
  segments: list[Tensor] = Field(..., description="s_1..s_N, each L×C")
  g_segments: list[Tensor] = Field(..., description="g_1..g_N, each L×d_seg")
  g_t: Tensor = Field(..., description="T×d_glob")
  f_t: Tensor | None = Field(default=None, description="T×d")


class PartFeatureSet(_TensorModel):
  """Every named intermediate of one forward pass (absent when ablated)."""

  M: Tensor
  g_sg: Tensor
  h_l: Tensor | None = None
  h_r: Tensor | None = None
  h_t: Tensor | None = None
  h_b: Tensor | None = None
  g_lr: Tensor | None = None
  g_tb: Tensor | None = None
  g_segments: list[Tensor] = Field(default_factory=list)
  g_t: Tensor | None = None
  f_s: Tensor | None = None
  f_t: Tensor | None = None
  f_st: Tensor | None = None

  def named_shapes(self) -> dict[str, tuple[int, ...]]:
    """Shapes keyed by symbol name (g_1..g_N for segments)."""
    shapes = {
      name: value.shape
      for name, value in self
      if isinstance(value, Tensor)
    }
    for index, g in enumerate(self.g_segments, start=1):
      shapes[f"g_{index}"] = g.shape
    return shapes


class LogitBundle(_TensorModel):
  """Per-head class logits; the full model fills all ten named heads."""

  q_left: Tensor | None = None
  q_right: Tensor | None = None
  q_top: Tensor | None = None
  q_bottom: Tensor | None = None
  q_lr: Tensor | None = None
  q_tb: Tensor | None = None
  q_sg: Tensor | None = None
  q_s: Tensor | None = None
  q_temp: Tensor | None = None
  q_st: Tensor | None = None
  extra: dict[str, Tensor] = Field(default_factory=dict, description="e.g. q_seg1..q_segN")

  def check(self) -> "LogitBundle":
    """Raise ShapeError unless all present heads are vectors of one length C."""
    shapes = {logits.shape for logits in self.present().values()}
    if len(shapes) > 1 or any(len(s) != 1 for s in shapes):
      error_msg = f"logit shapes disagree: {sorted(shapes)}"
      raise ShapeError(error_msg)
    return self

  def present(self) -> dict[str, Tensor]:
    """Heads in loss order: the ten named heads, then extras."""
    heads = {
      name: getattr(self, name)
      for name in HEAD_NAMES
      if getattr(self, name) is not None
    }
    heads.update(self.extra)
    return heads

  def is_complete(self) -> bool:
    return all(getattr(self, name) is not None for name in HEAD_NAMES)
