"""Part-level spatial modeling: stripe partition, gated fusion, cross-part attention."""
from __future__ import annotations

import math
from typing import NamedTuple

from app.core.errors import ShapeError
from app.models.features import SpatialParts
from app.nn import functional as F
from app.nn.tensor import Tensor
from .base import ModelBase, ParamSpec

PARTS = ("left", "right", "top", "bottom")
_ALL = slice(None)


class GateParams(NamedTuple):
  """Two-layer gate MLP C → C/r → C."""

  w1: Tensor
  b1: Tensor
  w2: Tensor
  b2: Tensor


def spatial_partition(M: Tensor) -> SpatialParts:
  """Pool M (T×C×H×W) globally and over left/right and top/bottom stripes.

  With an odd side the first stripe (left or top) takes the extra column/row.
  """
  if M.ndim != 4:
    error_msg = f"spatial_partition expects T×C×H×W, got {M.shape}"
    raise ShapeError(error_msg)
  height, width = M.shape[2], M.shape[3]
  if height < 2 or width < 2:
    error_msg = f"spatial_partition needs H, W >= 2, got {height}x{width}"
    raise ShapeError(error_msg)
  split_w = math.ceil(width / 2)
  split_h = math.ceil(height / 2)
  return SpatialParts(
    g_sg=F.mean_pool(M, (2, 3)),
    h_l=F.mean_pool(M[_ALL, _ALL, _ALL, :split_w], (2, 3)),
    h_r=F.mean_pool(M[_ALL, _ALL, _ALL, split_w:], (2, 3)),
    h_t=F.mean_pool(M[_ALL, _ALL, :split_h, _ALL], (2, 3)),
    h_b=F.mean_pool(M[_ALL, _ALL, split_h:, _ALL], (2, 3)),
  )


def gate(h: Tensor, params: GateParams) -> Tensor:
  """``h ⊙ σ(MLP(h))`` with the MLP applied per time step."""
  hidden = F.relu(F.affine(h, params.w1, params.b1))
  return h * F.sigmoid(F.affine(hidden, params.w2, params.b2))


class SpatialBranch(ModelBase):
  """Part-level spatial operations.

  Available public methods:
    - spatial_partition: M to g_sg, h_l, h_r, h_t, h_b
    - gate: gate one part feature with its own MLP
    - fuse_gated: (g_lr, g_tb) from gated part pairs
    - spatial_attention: f_s from g_sg attending to the part features
    - spatial_features: the whole branch, honouring the ablation switches

  """

  def _param_specs(self) -> dict[str, ParamSpec]:
    specs = super()._param_specs()
    cfg = self.config
    if cfg.global_only:
      return specs
    c, d = cfg.channels, cfg.d
    if not cfg.use_spatial:
      specs["spatial.proj.weight"] = ParamSpec((c, d), c)
      specs["spatial.proj.bias"] = ParamSpec((d,), c)
      return specs

    for part in self.active_parts:
      specs[f"spatial.gate.{part}.w1"] = ParamSpec((c, cfg.gate_hidden), c)
      specs[f"spatial.gate.{part}.b1"] = ParamSpec((cfg.gate_hidden,), c)
      specs[f"spatial.gate.{part}.w2"] = ParamSpec((cfg.gate_hidden, c), cfg.gate_hidden)
      specs[f"spatial.gate.{part}.b2"] = ParamSpec((c,), cfg.gate_hidden)

    if cfg.spatial_fusion == "attention":
      maps = ["q_s", "v_s"]
      if cfg.partitions in ("both", "lr"):
        maps += ["k_lr", "v_lr"]
      if cfg.partitions in ("both", "tb"):
        maps += ["k_tb", "v_tb"]
      for name in maps:
        specs[f"spatial.attn.{name}.weight"] = ParamSpec((c, d), c)
        specs[f"spatial.attn.{name}.bias"] = ParamSpec((d,), c)
    else:
      width = c * (2 if cfg.partitions != "both" else 3)
      specs["spatial.concat.weight"] = ParamSpec((width, d), width)
      specs["spatial.concat.bias"] = ParamSpec((d,), width)

    if cfg.attention_norm:
      specs["spatial.norm.gamma"] = ParamSpec((d,), d, "ones")
      specs["spatial.norm.beta"] = ParamSpec((d,), d, "zeros")
    return specs

  @property
  def active_parts(self) -> tuple[str, ...]:
    """Stripes used by the configured partition."""
    return {
      "both": PARTS,
      "lr": ("left", "right"),
      "tb": ("top", "bottom"),
    }[self.config.partitions]

  def gate_params(self, part: str) -> GateParams:
    """Gate weights of one stripe."""
    prefix = f"spatial.gate.{part}"
    return GateParams(*(self.p(f"{prefix}.{k}") for k in ("w1", "b1", "w2", "b2")))

  def spatial_partition(self, M: Tensor) -> SpatialParts:
    return spatial_partition(M)

  def gate(self, h: Tensor, part: str) -> Tensor:
    return gate(h, self.gate_params(part))

  def fuse_gated(self, parts: SpatialParts) -> tuple[Tensor | None, Tensor | None]:
    """``g_lr = G_left(h_l) + G_right(h_r)``, ``g_tb = G_top(h_t) + G_bottom(h_b)``."""
    g_lr = g_tb = None
    if "left" in self.active_parts:
      g_lr = self.gate(parts.h_l, "left") + self.gate(parts.h_r, "right")
    if "top" in self.active_parts:
      g_tb = self.gate(parts.h_t, "top") + self.gate(parts.h_b, "bottom")
    return g_lr, g_tb

  def spatial_attention(
    self, g_sg: Tensor, g_lr: Tensor | None, g_tb: Tensor | None,
  ) -> tuple[Tensor, Tensor]:
    """``f_s = softmax(Q_s K_pᵀ) V_p + V_s`` with keys stacked as [lr rows; tb rows].

    Returns:
        f_s (T×d) and the attention weights (T×(rows of K_p)).

    """
    keys, values = [], []
    for name, feature in (("lr", g_lr), ("tb", g_tb)):
      if feature is None:
        continue
      if feature.shape != g_sg.shape:
        error_msg = f"part feature g_{name} {feature.shape} vs g_sg {g_sg.shape}"
        raise ShapeError(error_msg)
      keys.append(self._linear(f"spatial.attn.k_{name}", feature))
      values.append(self._linear(f"spatial.attn.v_{name}", feature))
    query = self._linear("spatial.attn.q_s", g_sg)
    residual = self._linear("spatial.attn.v_s", g_sg)
    return F.attend(query, F.concat(keys, axis=0), F.concat(values, axis=0), residual)

  def spatial_features(
    self, M: Tensor,
  ) -> tuple[SpatialParts, Tensor | None, Tensor | None, Tensor]:
    """Run the whole branch; returns (parts, g_lr, g_tb, f_s)."""
    parts = spatial_partition(M)
    if not self.config.use_spatial:
      return parts, None, None, self._linear("spatial.proj", parts.g_sg)

    g_lr, g_tb = self.fuse_gated(parts)
    if self.config.spatial_fusion == "attention":
      f_s, _ = self.spatial_attention(parts.g_sg, g_lr, g_tb)
    else:
      stacked = [t for t in (parts.g_sg, g_lr, g_tb) if t is not None]
      f_s = self._linear("spatial.concat", F.concat(stacked, axis=1))
    if self.config.attention_norm:
      f_s = F.layer_norm(f_s, self.p("spatial.norm.gamma"), self.p("spatial.norm.beta"))
    return parts, g_lr, g_tb, f_s
