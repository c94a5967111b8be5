"""Error hierarchy shared by every layer.

The CLI maps `NumericError` to exit status 2 and every other `StepNetError`
to exit status 1.
"""


class StepNetError(Exception):
  """Base class for all domain errors."""


class ShapeError(StepNetError, ValueError):
  """Tensor dimensions or feature widths do not agree."""


class NumericError(StepNetError, ArithmeticError):
  """A tensor, loss, gradient or evaluation holds NaN or Inf."""


class ConfigError(StepNetError, ValueError):
  """Invalid experiment configuration or preset name."""


class DataError(StepNetError, ValueError):
  """Malformed clip file, manifest, export or dataset split."""


class LabelError(DataError):
  """Class index outside [0, num_classes)."""


class PrecisionError(StepNetError, TypeError):
  """Tensors of different precisions were combined in one graph."""
