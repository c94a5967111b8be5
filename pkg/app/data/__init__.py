"""Clip storage, sampling, augmentation, synthetic data and pseudo-flow."""
from .augment import augment, crop, hflip, resize_bilinear
from .clip_io import decode_clip, encode_clip, read_clip, write_clip
from .dataset import ClipDataset, ClipLoader, Sample, clip_rng
from .flow import pseudo_flow
from .manifest import read_manifest, validate_manifest, write_manifest
from .sampling import sample_frames
from .synthetic import class_factors, generate_synthetic, render_clip

__all__ = [
  "ClipDataset",
  "ClipLoader",
  "Sample",
  "augment",
  "class_factors",
  "clip_rng",
  "crop",
  "decode_clip",
  "encode_clip",
  "generate_synthetic",
  "hflip",
  "pseudo_flow",
  "read_clip",
  "read_manifest",
  "render_clip",
  "resize_bilinear",
  "sample_frames",
  "validate_manifest",
  "write_clip",
  "write_manifest",
]
