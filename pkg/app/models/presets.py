"""Named experiment presets and config-file loading."""
import json
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from app.core.errors import ConfigError
from app.models.config import ExperimentConfig


def _desk() -> dict[str, Any]:
  return {
    "schedule": {
      "epochs": 30,
      "warmup_epochs": 3,
      "batch_size": 8,
      "lr_peak": 3e-3,
      "lr_floor": 1e-4,
      "weight_decay": 0.01,
    },
  }


def _paper() -> dict[str, Any]:
  return {
    "data": {
      "resize": [320, 256],
      "crop": 256,
      "synthetic": {"height": 256, "width": 320},
    },
    "model": {
      "backbone": {
        "variant": "shift_cnn",
        "stage_channels": [256, 1024, 2048],
        "output_size": [16, 16],
      },
      "num_classes": 2000,
    },
    "schedule": {
      "epochs": 100,
      "warmup_epochs": 5,
      "batch_size": 8,
      "lr_peak": 1e-4,
      "lr_floor": 1e-5,
      "weight_decay": 0.1,
    },
  }


def _gradcheck() -> dict[str, Any]:
  return {
    "precision": "double",
    "data": {"num_frames": 4, "resize": [8, 8], "crop": 8},
    "model": {
      "backbone": {
        "variant": "pooling_only",
        "stage_channels": [8],
        "output_size": [4, 4],
      },
      "num_classes": 3,
      "segment_count": 3,
      "segment_length": 2,
    },
  }


def _with_model(**switches: Any) -> dict[str, Any]:
  overlay = _desk()
  overlay["model"] = switches
  return overlay


PRESETS: dict[str, Any] = {
  "desk": _desk,
  "paper": _paper,
  "gradcheck": _gradcheck,
  "tp_4x6": lambda: _with_model(segment_count=4, segment_length=6),
  "ablation_baseline": lambda: _with_model(use_spatial=False, use_temporal=False),
  "ablation_spatial_only": lambda: _with_model(use_temporal=False),
  "ablation_temporal_only": lambda: _with_model(use_spatial=False),
  "ablation_lr_only": lambda: _with_model(partitions="lr"),
  "ablation_tb_only": lambda: _with_model(partitions="tb"),
  "ablation_concat": lambda: _with_model(spatial_fusion="concatenate"),
  "ablation_no_gru": lambda: _with_model(use_grus=False),
  "local_temporal_heads": lambda: _with_model(local_temporal_heads=True),
  "global_only": lambda: _with_model(global_only=True),
}


def deep_merge(base: dict[str, Any], overlay: dict[str, Any]) -> dict[str, Any]:
  """Recursively overlay nested dictionaries; non-dict values replace."""
  merged = dict(base)
  for key, value in overlay.items():
    if isinstance(value, dict) and isinstance(merged.get(key), dict):
      merged[key] = deep_merge(merged[key], value)
    else:
      merged[key] = value
  return merged


def stream_overlay(stream: str) -> dict[str, Any]:
  """Config overlay selecting the RGB or pseudo-flow input stream."""
  channels = 10 if stream == "flow" else 3
  return {"data": {"modality": stream}, "model": {"backbone": {"in_channels": channels}}}


def build_config(overlay: dict[str, Any]) -> ExperimentConfig:
  """Validate a raw config dictionary."""
  try:
    return ExperimentConfig.model_validate(overlay)
  except ValidationError as e:
    error_msg = f"invalid experiment config: {e}"
    raise ConfigError(error_msg) from e


def preset_overlay(name: str) -> dict[str, Any]:
  """Raw overlay of a named preset."""
  if name not in PRESETS:
    error_msg = f"unknown preset '{name}'. Valid presets: {sorted(PRESETS)}"
    raise ConfigError(error_msg)
  return PRESETS[name]()


def preset(name: str) -> ExperimentConfig:
  """Return the named preset as a validated config."""
  return build_config(preset_overlay(name))


def load_experiment_config(
  path: str | Path | None = None,
  preset_name: str = "desk",
  overrides: dict[str, Any] | None = None,
) -> ExperimentConfig:
  """Layer a JSON config file and explicit overrides over a preset.

  Args:
    path: JSON document with sections data/model/schedule/fusion (optional)
    preset_name: preset providing the base values
    overrides: final overlay, e.g. ``{"seed": 3}`` from CLI flags

  Returns:
    Validated experiment config.

  """
  raw = preset_overlay(preset_name)
  if path is not None:
    try:
      document = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
      error_msg = f"cannot read config {path}: {e}"
      raise ConfigError(error_msg) from e
    if not isinstance(document, dict):
      error_msg = f"config {path} must hold a JSON object"
      raise ConfigError(error_msg)
    raw = deep_merge(raw, document)
  if overrides:
    raw = deep_merge(raw, overrides)
  return build_config(raw)
