"""Part-level temporal modeling: overlapping segments, non-shared GRUs, long-short attention."""
from __future__ import annotations

from app.core.errors import ConfigError, ShapeError
from app.models.features import SegmentPlan, TemporalFeatures
from app.nn import functional as F
from app.nn.recurrent import GRUParams, gru_sequence
from app.nn.tensor import Tensor
from .base import ModelBase, ParamSpec

GRU_FIELDS = GRUParams._fields


def plan_segments(num_frames: int, num_segments: int, length: int) -> SegmentPlan:
  """Spread N segments of L frames over T frames.

  ``starts[i] = round(i·(T−L)/(N−1))`` with halves rounded up, evaluated in
  integer arithmetic; a single segment must span the clip.
  """
  if not 1 <= length <= num_frames:
    error_msg = f"segment length {length} infeasible for {num_frames} frames"
    raise ConfigError(error_msg)
  if num_segments < 1:
    error_msg = f"segment count must be >= 1, got {num_segments}"
    raise ConfigError(error_msg)
  span = num_frames - length
  if num_segments == 1:
    if span:
      error_msg = f"a single segment must span all {num_frames} frames, got L={length}"
      raise ConfigError(error_msg)
    starts = (0,)
  else:
    gaps = num_segments - 1
    starts = tuple((2 * i * span + gaps) // (2 * gaps) for i in range(num_segments))
    if len(set(starts)) != num_segments:
      error_msg = f"{num_segments} distinct segments of {length} frames do not fit in {num_frames}"
      raise ConfigError(error_msg)
  return SegmentPlan(
    num_frames=num_frames, num_segments=num_segments, length=length, starts=starts,
  )


def temporal_pool(M: Tensor) -> Tensor:
  """Pool (H, W) of M to a T×C sequence."""
  return F.mean_pool(M, (2, 3))


class TemporalBranch(ModelBase):
  """Part-level temporal operations.

  Available public methods:
    - temporal_pool: M to the T×C sequence
    - run_grus: segment GRUs (g_1..g_N) and the global GRU (g_t)
    - temporal_attention: f_t from g_t attending to the segment states
    - fuse_branches: f_st from [f_s, f_t]
    - temporal_features: the whole branch, honouring the ablation switches

  """

  def _param_specs(self) -> dict[str, ParamSpec]:
    specs = super()._param_specs()
    cfg = self.config
    if cfg.global_only:
      return specs
    c, d = cfg.channels, cfg.d
    if not cfg.use_temporal:
      specs["temporal.proj.weight"] = ParamSpec((c, d), c)
      specs["temporal.proj.bias"] = ParamSpec((d,), c)
    else:
      encoders = [(f"temporal.seg{n}", cfg.d_seg) for n in range(cfg.segment_count)]
      encoders.append(("temporal.global", cfg.d_glob))
      for prefix, hidden in encoders:
        if cfg.use_grus:
          specs.update(self._gru_specs(prefix, c, hidden))
        else:
          specs[f"{prefix}.proj.weight"] = ParamSpec((c, hidden), c)
          specs[f"{prefix}.proj.bias"] = ParamSpec((hidden,), c)
      for n in range(cfg.segment_count):
        for kind in ("k", "v"):
          specs[f"temporal.attn.{kind}{n}.weight"] = ParamSpec((cfg.d_seg, d), cfg.d_seg)
          specs[f"temporal.attn.{kind}{n}.bias"] = ParamSpec((d,), cfg.d_seg)
      for name in ("q_t", "v_t"):
        specs[f"temporal.attn.{name}.weight"] = ParamSpec((cfg.d_glob, d), cfg.d_glob)
        specs[f"temporal.attn.{name}.bias"] = ParamSpec((d,), cfg.d_glob)
      if cfg.attention_norm:
        specs["temporal.norm.gamma"] = ParamSpec((d,), d, "ones")
        specs["temporal.norm.beta"] = ParamSpec((d,), d, "zeros")

    specs["fuse.fc1.weight"] = ParamSpec((2 * d, 2 * d), 2 * d)
    specs["fuse.fc1.bias"] = ParamSpec((2 * d,), 2 * d)
    specs["fuse.fc2.weight"] = ParamSpec((2 * d, cfg.d_out), 2 * d)
    specs["fuse.fc2.bias"] = ParamSpec((cfg.d_out,), 2 * d)
    return specs

  @staticmethod
  def _gru_specs(prefix: str, d_in: int, d_h: int) -> dict[str, ParamSpec]:
    specs = {}
    for name in GRU_FIELDS:
      shape = {"W": (d_in, d_h), "U": (d_h, d_h), "b": (d_h,)}[name[0]]
      specs[f"{prefix}.{name}"] = ParamSpec(shape, d_h)
    return specs

  def gru_params(self, prefix: str) -> GRUParams:
    return GRUParams(*(self.p(f"{prefix}.{name}") for name in GRU_FIELDS))

  def segment_plan(self, num_frames: int) -> SegmentPlan:
    return plan_segments(num_frames, self.config.segment_count, self.config.segment_length)

  def temporal_pool(self, M: Tensor) -> Tensor:
    return temporal_pool(M)

  def _encode(self, prefix: str, sequence: Tensor) -> Tensor:
    if self.config.use_grus:
      return gru_sequence(sequence, self.gru_params(prefix))
    return self._linear(f"{prefix}.proj", sequence)

  def run_grus(
    self, pooled: Tensor, plan: SegmentPlan,
  ) -> tuple[list[Tensor], list[Tensor], Tensor]:
    """Encode each segment with its own GRU and the whole clip with the global GRU.

    Returns:
        (segments s_n, hidden sequences g_n, global hidden sequence g_t).

    """
    if pooled.shape[0] != plan.num_frames:
      error_msg = f"pooled sequence has {pooled.shape[0]} rows, plan expects {plan.num_frames}"
      raise ShapeError(error_msg)
    segments = [pooled[start:start + plan.length] for start in plan.starts]
    g_segments = [
      self._encode(f"temporal.seg{n}", segment) for n, segment in enumerate(segments)
    ]
    return segments, g_segments, self._encode("temporal.global", pooled)

  def temporal_attention(
    self, g_t: Tensor, g_segments: list[Tensor],
  ) -> tuple[Tensor, Tensor]:
    """``f_t = softmax(Q_t K'_pᵀ) V'_p + V_t`` with segment keys stacked in index order.

    Returns:
        f_t (T×d) and the attention weights (T×(N·L)).

    """
    keys = [self._linear(f"temporal.attn.k{n}", g) for n, g in enumerate(g_segments)]
    values = [self._linear(f"temporal.attn.v{n}", g) for n, g in enumerate(g_segments)]
    query = self._linear("temporal.attn.q_t", g_t)
    residual = self._linear("temporal.attn.v_t", g_t)
    return F.attend(query, F.concat(keys, axis=0), F.concat(values, axis=0), residual)

  def temporal_features(self, M: Tensor) -> TemporalFeatures:
    """Run the whole branch."""
    pooled = temporal_pool(M)
    if not self.config.use_temporal:
      return TemporalFeatures(
        pooled=pooled, segments=[], g_segments=[], g_t=pooled,
        f_t=self._linear("temporal.proj", pooled),
      )
    segments, g_segments, g_t = self.run_grus(pooled, self.segment_plan(pooled.shape[0]))
    f_t, _ = self.temporal_attention(g_t, g_segments)
    if self.config.attention_norm:
      f_t = F.layer_norm(f_t, self.p("temporal.norm.gamma"), self.p("temporal.norm.beta"))
    return TemporalFeatures(
      pooled=pooled, segments=segments, g_segments=g_segments, g_t=g_t, f_t=f_t,
    )

  def fuse_branches(self, f_s: Tensor, f_t: Tensor) -> Tensor:
    """Two-layer MLP (2d → 2d ReLU → d_out) on the concatenation [f_s, f_t]."""
    if f_s.shape[0] != f_t.shape[0]:
      error_msg = f"f_s has {f_s.shape[0]} frames, f_t has {f_t.shape[0]}"
      raise ShapeError(error_msg)
    hidden = F.relu(self._linear("fuse.fc1", F.concat([f_s, f_t], axis=1)))
    return self._linear("fuse.fc2", hidden)
