"""Pydantic models for shape and gradient verification reports."""
from pydantic import BaseModel, Field


class GradcheckEntry(BaseModel):
  """Finite-difference result for one function."""

  name: str = Field(..., description="Checked function")
  max_rel_error: float = Field(..., description="Maximum relative error")
  tolerance: float = Field(..., description="Accepted error")

  @property
  def passed(self) -> bool:
    return self.max_rel_error <= self.tolerance


class GradcheckReport(BaseModel):
  """Whole finite-difference suite."""

  entries: list[GradcheckEntry] = Field(default_factory=list)

  @property
  def max_error(self) -> float:
    return max((e.max_rel_error for e in self.entries), default=0.0)

  @property
  def passed(self) -> bool:
    return all(e.passed for e in self.entries)


class ShapeRow(BaseModel):
  """One named tensor in the shape report."""

  name: str = Field(..., description="Symbol name")
  shape: tuple[int, ...] = Field(..., description="Propagated shape")
  expected: tuple[int, ...] | None = Field(default=None, description="Reference shape")

  @property
  def matches(self) -> bool:
    return self.expected is None or self.expected == self.shape

  def render(self) -> str:
    """``name: AxBxC`` plus a diff marker when it disagrees with the reference."""
    text = f"{self.name}: {'x'.join(str(s) for s in self.shape)}"
    if not self.matches:
      text += f"  (expected {'x'.join(str(s) for s in self.expected)})"
    return text
