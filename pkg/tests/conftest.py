"""Shared fixtures: tiny double-precision models and a small synthetic dataset."""
from pathlib import Path

import numpy as np
import pytest

from app.data.synthetic import generate_synthetic
from app.models.config import ExperimentConfig
from app.models.data import SyntheticSpec
from app.models.presets import build_config, deep_merge, preset, preset_overlay
from app.nn.tensor import Precision, Tensor
from app.services.interfaces import StepNet


def dyadic(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
  """Values k/256, so pooled sums and means are exact."""
  return rng.integers(0, 256, size=shape) / 256.0


def gradcheck_variant(**model_switches) -> ExperimentConfig:
  """The gradcheck preset with extra model switches."""
  return build_config(deep_merge(preset_overlay("gradcheck"), {"model": model_switches}))


@pytest.fixture
def rng() -> np.random.Generator:
  return np.random.default_rng(0)


@pytest.fixture
def gradcheck_config() -> ExperimentConfig:
  return preset("gradcheck")


@pytest.fixture
def tiny_model(gradcheck_config) -> StepNet:
  return StepNet(gradcheck_config.model, precision=Precision.DOUBLE, seed=0)


@pytest.fixture
def tiny_clip(gradcheck_config, rng) -> Tensor:
  data = gradcheck_config.data
  shape = (data.num_frames, 3, data.crop, data.crop)
  return Tensor(dyadic(rng, shape), precision=Precision.DOUBLE)


@pytest.fixture
def tiny_spec() -> SyntheticSpec:
  return SyntheticSpec(
    clips_per_class=5, raw_length=8, height=16, width=20, blob_size=2, num_signers=5,
  )


@pytest.fixture
def dataset_dir(tmp_path, tiny_spec) -> Path:
  root = tmp_path / "data"
  generate_synthetic(tiny_spec, root)
  return root


def tiny_experiment_overlay(root: Path, spec: SyntheticSpec) -> dict:
  return {
    "seed": 0,
    "data": {
      "root": str(root),
      "num_frames": 4,
      "resize": [20, 16],
      "crop": 16,
      "synthetic": spec.model_dump(),
    },
    "model": {
      "backbone": {
        "variant": "shift_cnn",
        "stage_channels": [4, 4],
        "shift_fraction": 0.5,
        "output_size": [2, 2],
      },
      "num_classes": spec.num_classes,
      "segment_count": 2,
      "segment_length": 2,
    },
    "schedule": {
      "epochs": 2,
      "warmup_epochs": 1,
      "batch_size": 4,
      "lr_peak": 1e-2,
      "lr_floor": 1e-3,
      "weight_decay": 0.01,
    },
  }


@pytest.fixture
def tiny_overlay(dataset_dir, tiny_spec) -> dict:
  return tiny_experiment_overlay(dataset_dir, tiny_spec)


@pytest.fixture
def tiny_experiment(tiny_overlay) -> ExperimentConfig:
  return build_config(deep_merge(preset_overlay("desk"), tiny_overlay))
