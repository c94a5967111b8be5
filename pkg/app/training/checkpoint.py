"""Deterministic checkpoint archives.

A checkpoint is an uncompressed zip with fixed member timestamps holding
``meta.json`` and one ``.npy`` member per parameter and optimizer moment, so
equal training runs write identical bytes.
"""
from __future__ import annotations

import io
import os
import zipfile
from pathlib import Path
from typing import NamedTuple

import numpy as np
from pydantic import ValidationError

from app.core.errors import DataError
from app.core.setup_logging import logger
from app.models.metrics import CheckpointMeta

FIXED_TIMESTAMP = (1980, 1, 1, 0, 0, 0)
META_MEMBER = "meta.json"
GROUPS = ("params", "adam_m", "adam_v")


class Checkpoint(NamedTuple):
  """Loaded checkpoint contents."""

  meta: CheckpointMeta
  params: dict[str, np.ndarray]
  adam_m: dict[str, np.ndarray]
  adam_v: dict[str, np.ndarray]


def _member(archive: zipfile.ZipFile, name: str, payload: bytes) -> None:
  info = zipfile.ZipInfo(name, date_time=FIXED_TIMESTAMP)
  info.compress_type = zipfile.ZIP_STORED
  info.external_attr = 0o644 << 16
  archive.writestr(info, payload)


def _npy(array: np.ndarray) -> bytes:
  buffer = io.BytesIO()
  np.save(buffer, np.ascontiguousarray(array), allow_pickle=False)
  return buffer.getvalue()


def save_checkpoint(path: str | Path, checkpoint: Checkpoint) -> None:
  """Write atomically: the previous file survives an interrupted save."""
  path = Path(path)
  path.parent.mkdir(parents=True, exist_ok=True)
  names = checkpoint.meta.param_names
  scratch = path.with_suffix(path.suffix + ".tmp")
  with zipfile.ZipFile(scratch, "w") as archive:
    _member(archive, META_MEMBER, checkpoint.meta.model_dump_json(indent=2).encode())
    for group in GROUPS:
      arrays = getattr(checkpoint, group)
      for name in names:
        if name in arrays:
          _member(archive, f"{group}/{name}.npy", _npy(arrays[name]))
  os.replace(scratch, path)
  logger.debug(f"Saved checkpoint {path} (step {checkpoint.meta.step})")


def load_checkpoint(path: str | Path) -> Checkpoint:
  """Read a checkpoint written by `save_checkpoint`."""
  path = Path(path)
  try:
    with zipfile.ZipFile(path) as archive:
      meta = CheckpointMeta.model_validate_json(archive.read(META_MEMBER))
      groups: dict[str, dict[str, np.ndarray]] = {group: {} for group in GROUPS}
      for member in archive.namelist():
        group, _, filename = member.partition("/")
        if group in groups and filename.endswith(".npy"):
          buffer = io.BytesIO(archive.read(member))
          groups[group][filename.removesuffix(".npy")] = np.load(buffer, allow_pickle=False)
  except (OSError, KeyError, zipfile.BadZipFile, ValidationError) as e:
    error_msg = f"cannot read checkpoint {path}: {e}"
    raise DataError(error_msg) from e
  missing = sorted(set(meta.param_names) - set(groups["params"]))
  if missing:
    error_msg = f"checkpoint {path} lacks parameters {missing}"
    raise DataError(error_msg)
  return Checkpoint(meta, groups["params"], groups["adam_m"], groups["adam_v"])
