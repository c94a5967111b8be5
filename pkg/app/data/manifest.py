"""Manifest (JSON lines) reading, writing and validation."""
from __future__ import annotations

from pathlib import Path

import pandas as pd
from pydantic import ValidationError

from app.core.errors import DataError, LabelError
from app.core.setup_logging import logger
from app.models.data import ManifestRecord

MANIFEST_NAME = "manifest.jsonl"


def write_manifest(path: str | Path, records: list[ManifestRecord]) -> None:
  lines = [record.model_dump_json() for record in records]
  Path(path).write_text("".join(f"{line}\n" for line in lines))


def manifest_frame(records: list[ManifestRecord]) -> pd.DataFrame:
  """Records as a DataFrame with columns path, label, split, signer_id."""
  return pd.DataFrame(
    [record.model_dump() for record in records],
    columns=list(ManifestRecord.model_fields),
  )


def validate_manifest(
  records: list[ManifestRecord], num_classes: int | None = None,
) -> None:
  """Check the signer-independent split and label density.

  Raises:
      DataError: a signer appears in both splits, or paths repeat
      LabelError: labels are not dense in [0, C)

  """
  if not records:
    error_msg = "manifest is empty"
    raise DataError(error_msg)
  frame = manifest_frame(records)

  if frame["path"].duplicated().any():
    duplicated = sorted(frame.loc[frame["path"].duplicated(), "path"].unique())
    error_msg = f"manifest repeats paths: {duplicated}"
    raise DataError(error_msg)

  splits_per_signer = frame.groupby("signer_id")["split"].nunique()
  shared = sorted(int(s) for s in splits_per_signer[splits_per_signer > 1].index)
  if shared:
    error_msg = f"signers {shared} appear in both train and test splits"
    raise DataError(error_msg)

  labels = set(frame["label"].astype(int))
  count = num_classes if num_classes is not None else max(labels) + 1
  missing = sorted(set(range(count)) - labels)
  outside = sorted(label for label in labels if label >= count)
  if missing or outside:
    error_msg = f"labels not dense in [0, {count}): missing {missing}, outside {outside}"
    raise LabelError(error_msg)

  for split in ("train", "test"):
    if not (frame["split"] == split).any():
      logger.warning(f"Manifest has no {split} clips")


def read_manifest(
  root: str | Path, num_classes: int | None = None,
) -> list[ManifestRecord]:
  """Load and validate ``root/manifest.jsonl``."""
  path = Path(root) / MANIFEST_NAME
  try:
    lines = path.read_text().splitlines()
  except OSError as e:
    error_msg = f"cannot read manifest {path}: {e}"
    raise DataError(error_msg) from e
  records = []
  for number, line in enumerate(lines, start=1):
    if not line.strip():
      continue
    try:
      records.append(ManifestRecord.model_validate_json(line))
    except ValidationError as e:
      error_msg = f"{path}:{number}: invalid record: {e}"
      raise DataError(error_msg) from e
  validate_manifest(records, num_classes)
  logger.debug(f"Loaded {len(records)} manifest records from {path}")
  return records
