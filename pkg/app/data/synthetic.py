"""Synthetic part-dependent sign dataset.

Every frame has three regions: a top band holding a static stripe texture,
and left/right lower halves each holding one coloured blob (red on the left,
blue on the right). A clip is two sub-actions: one blob moves out along its
class direction and back while the other rests, then the roles swap. The
class is (left direction, right direction, texture orientation, order), so
no single region or time window identifies it.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import NamedTuple

import numpy as np

from app.core.errors import DataError
from app.core.setup_logging import logger
from app.models.data import ManifestRecord, SyntheticSpec
from app.util.seeding import derive_rng
from .clip_io import write_clip
from .manifest import MANIFEST_NAME, write_manifest

SPEC_NAME = "synthetic.json"
STRIPE_PERIOD = 6.0
SIGNER_STREAM = 1_000_003


class ClassFactors(NamedTuple):
  """Factorial coordinates of one class."""

  left: int
  right: int
  texture: int
  order: int


class SignerStyle(NamedTuple):
  """Per-signer appearance jitter."""

  background: float
  brightness: float
  blob_scale: float


def class_factors(spec: SyntheticSpec, label: int) -> ClassFactors:
  """Decode a label; classes nest as left, right, texture, order (order fastest)."""
  if not 0 <= label < spec.num_classes:
    error_msg = f"label {label} outside [0, {spec.num_classes})"
    raise DataError(error_msg)
  label, order = divmod(label, spec.num_orders)
  label, texture = divmod(label, spec.num_textures)
  left, right = divmod(label, spec.num_right_patterns)
  return ClassFactors(left, right, texture, order)


def signer_style(spec: SyntheticSpec, signer_id: int) -> SignerStyle:
  rng = derive_rng(spec.seed, SIGNER_STREAM, signer_id)
  return SignerStyle(
    background=float(rng.uniform(0.15, 0.3)),
    brightness=float(rng.uniform(-0.08, 0.08)),
    blob_scale=float(rng.uniform(0.8, 1.2)),
  )


def signer_split(spec: SyntheticSpec, signer_id: int) -> str:
  """The highest `test_signers` identities form the test split."""
  return "test" if signer_id >= spec.num_signers - spec.test_signers else "train"


def _amplitude(spec: SyntheticSpec) -> float:
  return spec.width / 8


def check_geometry(spec: SyntheticSpec) -> None:
  """Raise DataError when a moving blob cannot stay inside its region."""
  reach = _amplitude(spec) + 1.2 * spec.blob_size
  half_width = spec.width / 4
  half_height = (spec.height - spec.height // 4) / 2
  if reach > min(half_width, half_height) or spec.height // 4 < 4:
    error_msg = (
      f"blob size {spec.blob_size} with motion amplitude {_amplitude(spec):.1f} "
      f"does not fit a {spec.height}x{spec.width} frame"
    )
    raise DataError(error_msg)


def _blob(
  grid: tuple[np.ndarray, np.ndarray], centre: tuple[float, float], sigma: float,
) -> np.ndarray:
  yy, xx = grid
  return np.exp(-((yy - centre[0]) ** 2 + (xx - centre[1]) ** 2) / (2 * sigma * sigma))


def _texture(spec: SyntheticSpec, texture: int) -> tuple[slice, slice, np.ndarray]:
  band = spec.height // 4
  rows = slice(1, band - 1)
  cols = slice(spec.width // 4, 3 * spec.width // 4)
  angle = texture * math.pi / spec.num_textures
  yy, xx = np.mgrid[rows, cols]
  phase = 2 * math.pi * (xx * math.cos(angle) + yy * math.sin(angle)) / STRIPE_PERIOD
  return rows, cols, 0.5 + 0.4 * np.sin(phase)


def _offsets(spec: SyntheticSpec, pattern: int, count: int, length: int) -> np.ndarray:
  """length×2 (dy, dx) displacements of one out-and-back movement.

  `pattern` of `count` patterns picks the direction angle pattern·π/count.
  """
  angle = pattern * math.pi / count
  tau = (np.arange(length) + 0.5) / length
  profile = _amplitude(spec) * np.sin(math.pi * tau)
  return np.stack([profile * math.sin(angle), profile * math.cos(angle)], axis=1)


def render_clip(
  spec: SyntheticSpec, label: int, signer_id: int, rng: np.random.Generator,
) -> np.ndarray:
  """raw_length×3×H×W clip in [0, 1] for one class and signer."""
  check_geometry(spec)
  factors = class_factors(spec, label)
  style = signer_style(spec, signer_id)
  length, height, width = spec.raw_length, spec.height, spec.width
  grid = np.mgrid[0:height, 0:width].astype(np.float64)
  sigma = 0.5 * spec.blob_size * style.blob_scale

  band = height // 4
  rest_y = band + (height - band) / 2 + rng.uniform(-1.5, 1.5)
  rests = {
    "left": (rest_y, width / 4 + rng.uniform(-1.5, 1.5)),
    "right": (rest_y, 3 * width / 4 + rng.uniform(-1.5, 1.5)),
  }
  first = length // 2
  phases = {"left": (0, first), "right": (first, length)}
  if factors.order == 1:
    phases = {"left": (first, length), "right": (0, first)}
  patterns = {
    "left": (factors.left, spec.num_left_patterns),
    "right": (factors.right, spec.num_right_patterns),
  }

  clip = np.full((length, 3, height, width), style.background + style.brightness)
  rows, cols, stripes = _texture(spec, factors.texture)
  clip[:, 1, rows, cols] = stripes + style.brightness
  for side, channel in (("left", 0), ("right", 2)):
    start, stop = phases[side]
    offsets = np.zeros((length, 2))
    offsets[start:stop] = _offsets(spec, *patterns[side], stop - start)
    for t in range(length):
      centre = (rests[side][0] + offsets[t, 0], rests[side][1] + offsets[t, 1])
      clip[t, channel] += 0.7 * _blob(grid, centre, sigma)

  clip += rng.normal(scale=spec.noise_std, size=clip.shape)
  return np.clip(clip, 0.0, 1.0).astype(np.float32)


def generate_synthetic(spec: SyntheticSpec, root: str | Path) -> list[ManifestRecord]:
  """Write every clip, ``manifest.jsonl`` and ``synthetic.json`` under `root`.

  Output is a pure function of `spec`; clip j of every class belongs to
  signer ``j mod num_signers``.
  """
  check_geometry(spec)
  root = Path(root)
  root.mkdir(parents=True, exist_ok=True)
  records = []
  for label in range(spec.num_classes):
    for index in range(spec.clips_per_class):
      signer_id = index % spec.num_signers
      rng = derive_rng(spec.seed, label, index)
      path = f"clips/{label:03d}_{index:04d}.svt"
      write_clip(root / path, render_clip(spec, label, signer_id, rng))
      records.append(ManifestRecord(
        path=path, label=label, split=signer_split(spec, signer_id), signer_id=signer_id,
      ))
  write_manifest(root / MANIFEST_NAME, records)
  (root / SPEC_NAME).write_text(spec.model_dump_json(indent=2) + "\n")
  logger.info(
    f"Generated {len(records)} clips of {spec.num_classes} classes under {root}",
  )
  return records
