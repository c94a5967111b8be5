"""Two-stream late fusion."""
from .late_fusion import (
  alpha_sweep, export_records, fuse_metrics, late_fuse, read_export, report_table, write_export,
)

__all__ = [
  "alpha_sweep",
  "export_records",
  "fuse_metrics",
  "late_fuse",
  "read_export",
  "report_table",
  "write_export",
]
