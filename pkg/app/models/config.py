"""Pydantic models for experiment configuration.

The JSON config file holds sections ``data``, ``model``, ``schedule`` and
``fusion`` plus the run fields ``seed``, ``deterministic`` and ``precision``.
It is layered over a named preset; see `app.models.presets`.
"""
from enum import Enum
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.models.data import SyntheticSpec
from app.models.features import HEAD_NAMES
from app.nn.tensor import Precision
from app.util.seeding import canonical_hash


class BackboneVariant(str, Enum):
  """Backbone variants."""
  POOLING_ONLY = "pooling_only"
  SHIFT_CNN = "shift_cnn"


class BackboneConfig(BaseModel):
  """Miniature backbone producing the feature map M."""

  model_config = ConfigDict(extra="forbid")

  variant: BackboneVariant = Field(
    default=BackboneVariant.SHIFT_CNN, description="Backbone variant",
  )
  in_channels: int = Field(default=3, description="3 for RGB, 10 for pseudo-flow")
  stage_channels: list[int] = Field(
    default=[8, 16, 32], description="Block output widths; last is C",
  )
  shift_fraction: float = Field(
    default=0.25, ge=0.0, le=0.5, description="Total shifted channel fraction",
  )
  output_size: tuple[int, int] = Field(default=(4, 4), description="Spatial size (H', W') of M")

  @field_validator("in_channels")
  @classmethod
  def validate_in_channels(cls, v: int) -> int:
    """Only RGB and 10-channel flow stacks are supported."""
    if v not in (3, 10):
      error_msg = f"in_channels must be 3 (RGB) or 10 (flow), got {v}"
      raise ValueError(error_msg)
    return v

  @field_validator("stage_channels")
  @classmethod
  def validate_stage_channels(cls, v: list[int]) -> list[int]:
    """Widths must be positive and nondecreasing."""
    if not v or any(c <= 0 for c in v) or any(a > b for a, b in zip(v, v[1:])):
      error_msg = f"stage_channels must be positive and nondecreasing, got {v}"
      raise ValueError(error_msg)
    return v

  @model_validator(mode="after")
  def validate_shift(self) -> "BackboneConfig":
    """Every stage must shift at least one channel when shifting is on."""
    if self.variant == BackboneVariant.SHIFT_CNN and self.shift_fraction > 0:
      narrow = [c for c in self.stage_channels if self.shift_fraction * c < 1]
      if narrow:
        error_msg = f"shift_fraction {self.shift_fraction} shifts no channel of widths {narrow}"
        raise ValueError(error_msg)
    return self

  @property
  def out_channels(self) -> int:
    return self.stage_channels[-1]


class ModelConfig(BaseModel):
  """StepNet dimensions and ablation switches."""

  model_config = ConfigDict(extra="forbid")

  backbone: BackboneConfig = Field(default_factory=BackboneConfig)
  num_classes: int = Field(default=8, ge=2, description="Number of gloss classes")
  attention_width: int | None = Field(default=None, description="d; defaults to C/2")
  segment_count: int = Field(default=3, ge=1, description="N temporal segments")
  segment_length: int = Field(default=8, ge=1, description="L frames per segment")
  segment_hidden: int | None = Field(default=None, description="d_seg; defaults to C/2")
  global_hidden: int | None = Field(default=None, description="d_glob; defaults to C")
  fused_width: int | None = Field(default=None, description="d_out of f_st; defaults to C")
  gate_reduction: int = Field(default=4, ge=1, description="Gate MLP bottleneck C/r")

  # Ablation switches
  use_spatial: bool = Field(default=True, description="Part-level spatial modeling")
  use_temporal: bool = Field(default=True, description="Part-level temporal modeling")
  partitions: Literal["both", "lr", "tb"] = Field(
    default="both", description="Stripe partitions used",
  )
  spatial_fusion: Literal["attention", "concatenate"] = Field(default="attention")
  use_grus: bool = Field(default=True, description="GRUs on segments and the full clip")
  attention_norm: bool = Field(default=False, description="Layer norm on f_s and f_t")
  local_temporal_heads: bool = Field(default=False, description="Extra heads on g_1..g_N")
  global_only: bool = Field(default=False, description="Backbone, g_sg and q_sg only")
  prediction_head: str = Field(default="q_st", description="Head used by predict")

  @model_validator(mode="after")
  def validate_widths(self) -> "ModelConfig":
    """Resolved widths must be positive."""
    for name in ("d", "d_seg", "d_glob", "d_out", "gate_hidden"):
      if getattr(self, name) < 1:
        error_msg = f"{name} resolves to {getattr(self, name)} for C={self.channels}"
        raise ValueError(error_msg)
    if self.global_only and self.prediction_head == "q_st":
      self.prediction_head = "q_sg"
    if self.prediction_head not in self.heads():
      error_msg = f"prediction_head {self.prediction_head} is not among the heads {self.heads()}"
      raise ValueError(error_msg)
    return self

  def heads(self) -> list[str]:
    """Classifier heads the switches produce, in loss order."""
    if self.global_only:
      return ["q_sg"]
    names = {"q_sg", "q_s", "q_temp", "q_st"}
    if self.use_spatial and self.partitions in ("both", "lr"):
      names |= {"q_left", "q_right", "q_lr"}
    if self.use_spatial and self.partitions in ("both", "tb"):
      names |= {"q_top", "q_bottom", "q_tb"}
    ordered = [name for name in HEAD_NAMES if name in names]
    if self.local_temporal_heads and self.use_temporal:
      ordered += [f"q_seg{n + 1}" for n in range(self.segment_count)]
    return ordered

  @property
  def channels(self) -> int:
    return self.backbone.out_channels

  @property
  def d(self) -> int:
    return self.attention_width or self.channels // 2

  @property
  def d_seg(self) -> int:
    return self.segment_hidden or self.channels // 2

  @property
  def d_glob(self) -> int:
    return self.global_hidden or self.channels

  @property
  def d_out(self) -> int:
    return self.fused_width or self.channels

  @property
  def gate_hidden(self) -> int:
    return self.channels // self.gate_reduction


class DataConfig(BaseModel):
  """Dataset location, sampling and augmentation geometry."""

  model_config = ConfigDict(extra="forbid")

  root: str = Field(default="data/synthetic", description="Dataset directory with manifest.jsonl")
  modality: Literal["rgb", "flow"] = Field(default="rgb", description="Input stream")
  num_frames: int = Field(default=16, ge=1, description="T frames sampled per clip")
  resize: tuple[int, int] = Field(default=(80, 64), description="Resize target (W, H)")
  crop: int = Field(default=64, ge=1, description="Square crop side S")
  synthetic: SyntheticSpec = Field(default_factory=SyntheticSpec)

  @model_validator(mode="after")
  def validate_crop(self) -> "DataConfig":
    """The crop must fit inside the resized frame."""
    if self.crop > min(self.resize):
      error_msg = f"crop {self.crop} larger than resized frame {self.resize}"
      raise ValueError(error_msg)
    return self


class ScheduleConfig(BaseModel):
  """Optimizer, learning-rate schedule and batching."""

  model_config = ConfigDict(extra="forbid")

  epochs: int = Field(default=30, ge=1)
  warmup_epochs: int = Field(default=5, ge=0)
  batch_size: int = Field(default=8, ge=1)
  lr_peak: float = Field(default=1e-4, gt=0)
  lr_floor: float = Field(default=1e-5, ge=0)
  weight_decay: float = Field(default=0.1, ge=0)
  betas: tuple[float, float] = Field(default=(0.9, 0.999))
  eps: float = Field(default=1e-8, gt=0)

  @model_validator(mode="after")
  def validate_schedule(self) -> "ScheduleConfig":
    """Warmup must leave room for the cosine phase; floor below peak."""
    if self.warmup_epochs >= self.epochs:
      error_msg = f"warmup_epochs {self.warmup_epochs} must be < epochs {self.epochs}"
      raise ValueError(error_msg)
    if self.lr_floor > self.lr_peak:
      error_msg = f"lr_floor {self.lr_floor} exceeds lr_peak {self.lr_peak}"
      raise ValueError(error_msg)
    return self


def default_alpha_grid() -> list[float]:
  return [round(0.1 * i, 10) for i in range(11)]


class FusionConfig(BaseModel):
  """Two-stream late fusion."""

  model_config = ConfigDict(extra="forbid")

  alpha: float = Field(default=0.4, ge=0, description="Weight of the flow logits")
  grid: list[float] = Field(default_factory=default_alpha_grid, description="Swept alphas")

  @field_validator("grid")
  @classmethod
  def validate_grid(cls, v: list[float]) -> list[float]:
    """Alphas must be strictly increasing."""
    if not v or any(a >= b for a, b in zip(v, v[1:])):
      error_msg = f"alpha grid must be non-empty and strictly increasing, got {v}"
      raise ValueError(error_msg)
    return v


class ExperimentConfig(BaseModel):
  """Single source of truth for one run."""

  model_config = ConfigDict(extra="forbid")

  seed: int = Field(default=0, ge=0, description="Run seed")
  deterministic: bool = Field(default=True, description="In-order batch accumulation")
  precision: Precision = Field(default=Precision.SINGLE, description="Tensor precision")
  data: DataConfig = Field(default_factory=DataConfig)
  model: ModelConfig = Field(default_factory=ModelConfig)
  schedule: ScheduleConfig = Field(default_factory=ScheduleConfig)
  fusion: FusionConfig = Field(default_factory=FusionConfig)

  @model_validator(mode="after")
  def validate_streams(self) -> "ExperimentConfig":
    """Backbone input channels must match the data modality."""
    expected = 10 if self.data.modality == "flow" else 3
    if self.model.backbone.in_channels != expected:
      error_msg = (
        f"modality {self.data.modality} needs in_channels={expected}, "
        f"got {self.model.backbone.in_channels}"
      )
      raise ValueError(error_msg)
    if self.model.segment_length > self.data.num_frames:
      error_msg = (
        f"segment_length {self.model.segment_length} exceeds "
        f"num_frames {self.data.num_frames}"
      )
      raise ValueError(error_msg)
    return self

  def config_hash(self) -> str:
    """SHA-256 of the canonical JSON form."""
    return canonical_hash(self.model_dump(mode="json"))
