"""Pydantic models for multi-seed comparison runs."""
import numpy as np
from pydantic import BaseModel, Field, computed_field, model_validator

from app.core.errors import ConfigError


class ArmResult(BaseModel):
  """Best test top-1 of one model variant over several seeds."""

  name: str = Field(..., description="Variant name, e.g. full or global_only")
  seeds: list[int] = Field(..., description="Run seeds")
  top1: list[float] = Field(..., description="Best per-instance top-1 per seed")

  @model_validator(mode="after")
  def validate_lengths(self) -> "ArmResult":
    if not self.seeds or len(self.seeds) != len(self.top1):
      error_msg = f"{self.name}: {len(self.seeds)} seeds but {len(self.top1)} results"
      raise ValueError(error_msg)
    return self

  @computed_field
  @property
  def median_top1(self) -> float:
    return float(np.median(self.top1))


class ComparisonReport(BaseModel):
  """Variants trained under one budget on one dataset."""

  arms: list[ArmResult] = Field(..., description="One entry per variant")
  config_hash: str = Field(..., description="Hash of the shared base config")

  def arm(self, name: str) -> ArmResult:
    for arm in self.arms:
      if arm.name == name:
        return arm
    error_msg = f"no variant named {name}; have {[a.name for a in self.arms]}"
    raise ConfigError(error_msg)

  def margin(self, name: str, baseline: str) -> float:
    """Median top-1 of `name` minus that of `baseline`, in points."""
    return self.arm(name).median_top1 - self.arm(baseline).median_top1


class TwoStreamSeed(BaseModel):
  """RGB, flow and best fused accuracy of one seed."""

  seed: int
  rgb_top1: float = Field(..., description="Standalone RGB top-1")
  flow_top1: float = Field(..., description="Standalone flow top-1")
  fused_top1: float = Field(..., description="Top-1 at the best swept alpha")
  best_alpha: float


class TwoStreamReport(BaseModel):
  """Two-stream fusion over several seeds."""

  runs: list[TwoStreamSeed] = Field(..., min_length=1)
  config_hash: str = Field(..., description="Hash of the shared base config")

  @computed_field
  @property
  def median_rgb_top1(self) -> float:
    return float(np.median([run.rgb_top1 for run in self.runs]))

  @computed_field
  @property
  def median_fused_top1(self) -> float:
    return float(np.median([run.fused_top1 for run in self.runs]))
