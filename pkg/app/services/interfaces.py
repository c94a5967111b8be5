"""StepNet combining the backbone, both branches and the heads."""
from __future__ import annotations

from app.models.features import HEAD_NAMES, LogitBundle, PartFeatureSet
from app.nn.tensor import Tensor, no_tape
from .backbone import Backbone
from .heads import Heads, predict, total_loss
from .spatial import SpatialBranch, spatial_partition
from .temporal import TemporalBranch


class StepNet(
  Backbone,
  SpatialBranch,
  TemporalBranch,
  Heads,
):
  """Main StepNet model combining all functionality."""

  def forward(self, clip: Tensor) -> tuple[PartFeatureSet, LogitBundle]:
    """Clip (T×C_in×H×W) to every named feature and the logit bundle."""
    M = self.backbone_forward(clip)

    if self.config.global_only:
      g_sg = spatial_partition(M).g_sg
      features = PartFeatureSet(M=M, g_sg=g_sg)
      return features, LogitBundle(q_sg=self.classify(g_sg, "q_sg")).check()

    parts, g_lr, g_tb, f_s = self.spatial_features(M)
    temporal = self.temporal_features(M)
    f_st = self.fuse_branches(f_s, temporal.f_t)
    active = set(self.active_parts) if self.config.use_spatial else set()
    features = PartFeatureSet(
      M=M,
      g_sg=parts.g_sg,
      h_l=parts.h_l if "left" in active else None,
      h_r=parts.h_r if "right" in active else None,
      h_t=parts.h_t if "top" in active else None,
      h_b=parts.h_b if "bottom" in active else None,
      g_lr=g_lr,
      g_tb=g_tb,
      g_segments=temporal.g_segments,
      g_t=temporal.g_t if self.config.use_temporal else None,
      f_s=f_s,
      f_t=temporal.f_t,
      f_st=f_st,
    )
    sources = {
      "q_left": features.h_l,
      "q_right": features.h_r,
      "q_top": features.h_t,
      "q_bottom": features.h_b,
      "q_lr": g_lr,
      "q_tb": g_tb,
      "q_sg": parts.g_sg,
      "q_s": f_s,
      "q_temp": temporal.f_t,
      "q_st": f_st,
    }
    names = self.head_names()
    logits = {name: self.classify(sources[name], name) for name in HEAD_NAMES if name in names}
    extra = {
      f"q_seg{n + 1}": self.classify(g, f"q_seg{n + 1}")
      for n, g in enumerate(temporal.g_segments)
      if f"q_seg{n + 1}" in names
    }
    return features, LogitBundle(**logits, extra=extra).check()

  def loss(self, clip: Tensor, label: int) -> Tensor:
    """Accumulated cross-entropy of every configured head."""
    _, bundle = self.forward(clip)
    return total_loss(bundle, label)

  def logits(self, clip: Tensor) -> LogitBundle:
    """Inference-only forward (nothing recorded)."""
    with no_tape():
      return self.forward(clip)[1]

  def predict(self, clip: Tensor) -> int:
    return predict(self.logits(clip), self.config.prediction_head)
