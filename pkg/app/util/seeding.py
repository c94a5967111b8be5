"""Deterministic hashing and generator derivation."""
import hashlib
import json
import zlib
from typing import Any

import numpy as np


def canonical_json(value: Any) -> str:  # noqa: ANN401
  """Sorted-key, whitespace-free JSON."""
  return json.dumps(value, sort_keys=True, separators=(",", ":"))


def canonical_hash(value: Any) -> str:  # noqa: ANN401
  """SHA-256 hex digest of `canonical_json(value)`.

  Examples:
    >>> canonical_hash({"b": 1, "a": 2}) == canonical_hash({"a": 2, "b": 1})
    True

  """
  return hashlib.sha256(canonical_json(value).encode()).hexdigest()


def name_key(name: str) -> int:
  """Stable 32-bit key of a string (CRC-32)."""
  return zlib.crc32(name.encode())


def derive_rng(*keys: int | str) -> np.random.Generator:
  """Generator seeded by a sequence of integer or string keys.

  Equal keys give equal streams on every platform, independent of call
  order, so per-parameter and per-clip draws never interfere.
  """
  entropy = [name_key(k) if isinstance(k, str) else int(k) for k in keys]
  return np.random.default_rng(np.random.SeedSequence(entropy))
