"""Clip dataset and a thread-pool batch loader."""
from __future__ import annotations

from collections import deque
from collections.abc import Iterator, Sequence
from concurrent.futures import Future, ThreadPoolExecutor, as_completed
from pathlib import Path
from typing import NamedTuple

import numpy as np

from app.core.errors import DataError
from app.core.setup_logging import logger
from app.models.config import DataConfig
from app.models.data import ManifestRecord
from app.util.seeding import derive_rng
from .augment import augment
from .clip_io import read_clip
from .flow import pseudo_flow
from .manifest import read_manifest
from .sampling import Mode, sample_frames


class Sample(NamedTuple):
  """One prepared clip."""

  clip_id: str
  clip: np.ndarray
  label: int


def clip_rng(seed: int, clip_index: int, epoch: int) -> np.random.Generator:
  """Generator for one clip in one epoch, independent of worker scheduling."""
  return derive_rng(seed, clip_index, epoch)


class ClipDataset:
  """Clips of one split, prepared as T×C_in×S×S float32 arrays.

  Available public methods:
    - load: sample, optionally convert to pseudo-flow, and augment one clip
    - labels: class of every clip in split order

  """

  def __init__(
    self,
    config: DataConfig,
    split: str,
    *,
    seed: int = 0,
    num_classes: int | None = None,
    records: list[ManifestRecord] | None = None,
  ) -> None:
    """Read the manifest under ``config.root`` (or use `records`)."""
    self.config = config
    self.split = split
    self.seed = seed
    self.root = Path(config.root)
    if records is None:
      records = read_manifest(self.root, num_classes)
    self.records = [r for r in records if r.split == split]
    if not self.records:
      error_msg = f"split '{split}' of {self.root} is empty"
      raise DataError(error_msg)
    logger.debug(f"{split} split: {len(self.records)} clips from {self.root}")

  def __len__(self) -> int:
    return len(self.records)

  def labels(self) -> list[int]:
    return [r.label for r in self.records]

  def clip_id(self, index: int) -> str:
    return Path(self.records[index].path).with_suffix("").as_posix()

  def load(self, index: int, mode: Mode, epoch: int = 0) -> Sample:
    """Prepare clip `index`; test mode ignores the generator entirely."""
    record = self.records[index]
    rng = clip_rng(self.seed, index, epoch) if mode == "train" else None
    raw = read_clip(self.root / record.path)
    indices = sample_frames(raw.shape[0], mode, self.config.num_frames, rng)
    flow = self.config.modality == "flow"
    frames = pseudo_flow(raw, indices) if flow else raw[indices]
    clip = augment(frames, mode, rng, self.config.resize, self.config.crop, flow=flow)
    return Sample(self.clip_id(index), clip, record.label)


class ClipLoader:
  """Batches clips on a worker pool.

  Batches always arrive in request order. With ``ordered`` the samples inside
  a batch do too; otherwise they arrive as workers finish them, so gradient
  accumulation over the batch loses its fixed summation order.
  """

  def __init__(
    self,
    dataset: ClipDataset,
    batch_size: int,
    num_workers: int = 2,
    prefetch: int = 2,
    *,
    ordered: bool = True,
  ) -> None:
    self.dataset = dataset
    self.batch_size = batch_size
    self.num_workers = max(1, num_workers)
    self.prefetch = max(1, prefetch)
    self.ordered = ordered

  def _collect(self, futures: list[Future[Sample]]) -> list[Sample]:
    if self.ordered:
      return [future.result() for future in futures]
    return [future.result() for future in as_completed(futures)]

  def batches(
    self, order: Sequence[int], mode: Mode, epoch: int = 0,
  ) -> Iterator[list[Sample]]:
    """Yield batches of `order`; at most `prefetch` batches are in flight."""
    chunks = [
      list(order[start:start + self.batch_size])
      for start in range(0, len(order), self.batch_size)
    ]
    with ThreadPoolExecutor(max_workers=self.num_workers) as pool:
      pending: deque[list[Future[Sample]]] = deque()
      for chunk in chunks:
        pending.append([pool.submit(self.dataset.load, i, mode, epoch) for i in chunk])
        if len(pending) > self.prefetch:
          yield self._collect(pending.popleft())
      while pending:
        yield self._collect(pending.popleft())
