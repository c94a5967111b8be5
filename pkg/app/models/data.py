"""Pydantic models for datasets."""
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ManifestRecord(BaseModel):
  """One line of manifest.jsonl."""

  model_config = ConfigDict(extra="forbid")

  path: str = Field(..., description="Clip file path, relative to the dataset root")
  label: int = Field(..., ge=0, description="Class index")
  split: Literal["train", "test"] = Field(..., description="Dataset split")
  signer_id: int = Field(..., ge=0, description="Signer identity")


class SyntheticSpec(BaseModel):
  """Factorial design of the synthetic part-dependent dataset.

  A class is the tuple (left motion pattern, right motion pattern, top texture,
  sub-action order); classes are enumerated in that nesting order.
  """

  model_config = ConfigDict(extra="forbid")

  num_left_patterns: int = Field(default=2, ge=1)
  num_right_patterns: int = Field(default=2, ge=1)
  num_textures: int = Field(default=2, ge=1)
  num_orders: int = Field(
    default=1, ge=1, le=2, description="1: fixed, 2: left-first / right-first",
  )
  num_classes: int | None = Field(default=None, description="Must equal the factorial product")
  clips_per_class: int = Field(default=40, ge=1)
  raw_length: int = Field(default=32, ge=2, description="Frames before sampling")
  height: int = Field(default=64, ge=8)
  width: int = Field(default=80, ge=8)
  blob_size: int = Field(default=6, ge=1)
  noise_std: float = Field(default=0.03, ge=0)
  num_signers: int = Field(default=5, ge=2)
  test_signers: int = Field(default=1, ge=1)
  seed: int = Field(default=0, ge=0)

  @model_validator(mode="after")
  def validate_design(self) -> "SyntheticSpec":
    """Class count is the product of the factors; both splits get signers."""
    product = (
      self.num_left_patterns * self.num_right_patterns * self.num_textures * self.num_orders
    )
    if self.num_classes is not None and self.num_classes != product:
      error_msg = f"num_classes {self.num_classes} != factorial product {product}"
      raise ValueError(error_msg)
    self.num_classes = product
    if self.test_signers >= self.num_signers:
      error_msg = "test_signers must leave at least one training signer"
      raise ValueError(error_msg)
    return self
