"""StepNet model package."""
from .interfaces import StepNet

__all__ = ["StepNet"]
