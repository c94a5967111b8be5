"""Utility modules."""
from .seeding import canonical_hash, canonical_json, derive_rng, name_key

__all__ = [
  "canonical_hash",
  "canonical_json",
  "derive_rng",
  "name_key",
]
