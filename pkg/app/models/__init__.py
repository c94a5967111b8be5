"""Models package."""
from .data import ManifestRecord, SyntheticSpec
from .config import (
  BackboneConfig, BackboneVariant, DataConfig, ExperimentConfig, FusionConfig,
  ModelConfig, ScheduleConfig,
)
from .features import (
  HEAD_NAMES, SPATIAL_HEADS, LogitBundle, PartFeatureSet, SegmentPlan, SpatialParts,
  TemporalFeatures,
)
from .metrics import CheckpointMeta, EpochRecord, EvalMetrics, HeadAccuracy
from .fusion import FusionReport, FusionRow, LogitRecord
from .verification import GradcheckEntry, GradcheckReport, ShapeRow
from .presets import PRESETS, load_experiment_config, preset

__all__ = [
  # Data models
  "ManifestRecord",
  "SyntheticSpec",
  # Config models
  "BackboneConfig",
  "BackboneVariant",
  "DataConfig",
  "ExperimentConfig",
  "FusionConfig",
  "ModelConfig",
  "ScheduleConfig",
  "PRESETS",
  "load_experiment_config",
  "preset",
  # Feature models
  "HEAD_NAMES",
  "SPATIAL_HEADS",
  "LogitBundle",
  "PartFeatureSet",
  "SegmentPlan",
  "SpatialParts",
  "TemporalFeatures",
  # Metrics models
  "CheckpointMeta",
  "EpochRecord",
  "EvalMetrics",
  "HeadAccuracy",
  # Fusion models
  "FusionReport",
  "FusionRow",
  "LogitRecord",
  # Verification models
  "GradcheckEntry",
  "GradcheckReport",
  "ShapeRow",
  ]
