"""Pydantic models for logit exports and fusion reports."""
from pydantic import BaseModel, Field, field_validator

from app.models.metrics import EvalMetrics


class LogitRecord(BaseModel):
  """One line of a logit export: the q_st of one stream for one clip."""

  clip_id: str = Field(..., description="Unique clip identifier")
  label: int = Field(..., ge=0, description="Ground-truth class")
  logits: list[float] = Field(..., description="C logits")


class FusionRow(BaseModel):
  """Metrics of one swept alpha."""

  alpha: float = Field(..., description="Flow weight")
  metrics: EvalMetrics


class FusionReport(BaseModel):
  """Result of an alpha sweep."""

  rows: list[FusionRow] = Field(..., description="One row per alpha")
  best_alpha: float = Field(..., description="Best top-1 alpha (lowest on ties)")
  rgb_export: str = Field(..., description="RGB export path")
  opt_export: str = Field(..., description="Flow export path")
  config_hash: str | None = Field(default=None, description="Hash of the experiment config")

  @field_validator("rows")
  @classmethod
  def validate_rows(cls, v: list[FusionRow]) -> list[FusionRow]:
    """Alphas strictly increasing."""
    alphas = [row.alpha for row in v]
    if any(a >= b for a, b in zip(alphas, alphas[1:])):
      error_msg = f"alphas not strictly increasing: {alphas}"
      raise ValueError(error_msg)
    return v
