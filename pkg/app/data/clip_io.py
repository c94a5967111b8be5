"""ClipFile codec.

Layout: magic ``SVT1``, four little-endian uint32 dims (T, C, H, W), then
T·C·H·W little-endian float32 values in row-major order.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from app.core.errors import DataError

MAGIC = b"SVT1"
HEADER = struct.Struct("<4I")
HEADER_SIZE = len(MAGIC) + HEADER.size
VALUE_DTYPE = np.dtype("<f4")


def encode_clip(clip: np.ndarray) -> bytes:
  """Serialise a T×C×H×W array."""
  if clip.ndim != 4:
    error_msg = f"clip must be T×C×H×W, got shape {clip.shape}"
    raise DataError(error_msg)
  values = np.ascontiguousarray(clip, dtype=VALUE_DTYPE)
  return MAGIC + HEADER.pack(*values.shape) + values.tobytes()


def decode_clip(payload: bytes, source: str = "<bytes>") -> np.ndarray:
  """Parse ClipFile bytes into a float32 T×C×H×W array."""
  if len(payload) < HEADER_SIZE or payload[:len(MAGIC)] != MAGIC:
    error_msg = f"{source}: not a clip file (bad magic or truncated header)"
    raise DataError(error_msg)
  dims = HEADER.unpack_from(payload, len(MAGIC))
  expected = HEADER_SIZE + VALUE_DTYPE.itemsize * int(np.prod(dims))
  if len(payload) != expected:
    error_msg = f"{source}: {len(payload)} bytes, header {dims} implies {expected}"
    raise DataError(error_msg)
  values = np.frombuffer(payload, dtype=VALUE_DTYPE, offset=HEADER_SIZE)
  return values.reshape(dims).astype(np.float32)


def write_clip(path: str | Path, clip: np.ndarray) -> None:
  path = Path(path)
  path.parent.mkdir(parents=True, exist_ok=True)
  path.write_bytes(encode_clip(clip))


def read_clip(path: str | Path) -> np.ndarray:
  try:
    payload = Path(path).read_bytes()
  except OSError as e:
    error_msg = f"cannot read clip {path}: {e}"
    raise DataError(error_msg) from e
  return decode_clip(payload, str(path))
