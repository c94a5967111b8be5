"""Numeric substrate: dense tensors, tape-based reverse-mode differentiation."""
from .tensor import Precision, Tape, Tensor, backward, no_tape
from . import functional
from .recurrent import GRUParams, gru_cell, gru_sequence
from .gradcheck import finite_diff_check

__all__ = [
  "GRUParams",
  "Precision",
  "Tape",
  "Tensor",
  "backward",
  "finite_diff_check",
  "functional",
  "gru_cell",
  "gru_sequence",
  "no_tape",
]
