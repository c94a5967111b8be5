"""Per-part classifiers, the accumulated loss and prediction."""
from __future__ import annotations

import numpy as np

from app.core.errors import ShapeError
from app.models.features import LogitBundle
from app.nn import functional as F
from app.nn.tensor import Tensor
from .base import ModelBase, ParamSpec


def classify(feature: Tensor, W: Tensor, b: Tensor) -> Tensor:
  """Time-mean of a T×d feature followed by an affine map to C logits."""
  if feature.ndim != 2 or feature.shape[1] != W.shape[0]:
    error_msg = f"classifier of width {W.shape[0]} cannot read feature {feature.shape}"
    raise ShapeError(error_msg)
  pooled = F.reshape(F.mean_pool(feature, 0), (1, feature.shape[1]))
  return F.reshape(F.affine(pooled, W, b), (W.shape[1],))


def total_loss(bundle: LogitBundle, label: int) -> Tensor:
  """Unweighted sum of per-head cross-entropies.

  Heads are summed left to right in bundle order: the eight spatial terms,
  then q_temp, then q_st, then any extra heads.
  """
  heads = bundle.present()
  if not heads:
    error_msg = "logit bundle is empty"
    raise ShapeError(error_msg)
  loss = None
  for logits in heads.values():
    term = F.cross_entropy(logits, label)
    loss = term if loss is None else loss + term
  return loss


def predict(bundle: LogitBundle, head: str = "q_st") -> int:
  """Argmax of one head (q_st by default); ties go to the lowest class index."""
  logits = bundle.present().get(head)
  if logits is None:
    error_msg = f"bundle has no head {head}"
    raise ShapeError(error_msg)
  return int(np.argmax(logits.data))


class Heads(ModelBase):
  """Classifier heads.

  Available public methods:
    - classify: logits of one named head
    - head_names: heads implied by the configuration

  """

  def head_widths(self) -> dict[str, int]:
    """Input width of every configured head, in loss order."""
    cfg = self.config
    widths = {"q_s": cfg.d, "q_temp": cfg.d, "q_st": cfg.d_out}
    return {
      name: cfg.d_seg if name.startswith("q_seg") else widths.get(name, cfg.channels)
      for name in cfg.heads()
    }

  def head_names(self) -> list[str]:
    return list(self.head_widths())

  def _param_specs(self) -> dict[str, ParamSpec]:
    specs = super()._param_specs()
    classes = self.config.num_classes
    for name, width in self.head_widths().items():
      specs[f"heads.{name}.weight"] = ParamSpec((width, classes), width)
      specs[f"heads.{name}.bias"] = ParamSpec((classes,), width)
    return specs

  def classify(self, feature: Tensor, head: str) -> Tensor:
    return classify(feature, self.p(f"heads.{head}.weight"), self.p(f"heads.{head}.bias"))
