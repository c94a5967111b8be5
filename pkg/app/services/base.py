"""Parameter storage shared by the StepNet mixins."""
from __future__ import annotations

import copy
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from app.core.errors import ShapeError
from app.core.setup_logging import logger
from app.models.config import ModelConfig
from app.nn import functional as F, init
from app.nn.tensor import Precision, Tensor
from app.util.seeding import derive_rng

if TYPE_CHECKING:
  from typing_extensions import Self


class ParamSpec(NamedTuple):
  """Shape and initialiser of one parameter."""

  shape: tuple[int, ...]
  fan_in: int
  kind: str = "uniform"


class ModelBase:
  """Owns configuration and parameters. No public forward.

  Mixins extend `_param_specs` cooperatively; every parameter draws from its
  own generator seeded by (seed, stream, crc32(name)), so adding a parameter
  never changes the initial values of the others.
  """

  def __init__(
    self,
    config: ModelConfig,
    *,
    precision: Precision = Precision.SINGLE,
    seed: int = 0,
    stream: int = 0,
    params: dict[str, Tensor] | None = None,
    materialize: bool = True,
  ) -> None:
    """Initialize parameters (or adopt `params`)."""
    self.config = config
    self.precision = precision
    self.seed = seed
    self.stream = stream
    if params is not None:
      self.params = dict(params)
      self._check_params()
    elif materialize:
      self.params = self._init_params()
    else:
      self.params = {}

  def _param_specs(self) -> dict[str, ParamSpec]:
    return {}

  def param_specs(self) -> dict[str, ParamSpec]:
    """All parameter specs implied by the configuration."""
    return self._param_specs()

  def param_count(self) -> int:
    """Number of scalar parameters, computed without allocating them."""
    return sum(int(np.prod(spec.shape)) for spec in self.param_specs().values())

  def _init_params(self) -> dict[str, Tensor]:
    params = {}
    for name, spec in self.param_specs().items():
      if spec.kind == "zeros":
        params[name] = init.constant(spec.shape, 0.0, self.precision, name)
      elif spec.kind == "ones":
        params[name] = init.constant(spec.shape, 1.0, self.precision, name)
      else:
        rng = derive_rng(self.seed, self.stream, name)
        params[name] = init.uniform_fan_in(rng, spec.shape, spec.fan_in, self.precision, name)
    logger.debug(f"Initialised {len(params)} parameter tensors ({self.param_count()} values)")
    return params

  def _check_params(self) -> None:
    specs = self.param_specs()
    missing = sorted(set(specs) - set(self.params))
    unexpected = sorted(set(self.params) - set(specs))
    if missing or unexpected:
      error_msg = f"parameter set mismatch: missing {missing}, unexpected {unexpected}"
      raise ShapeError(error_msg)
    for name, spec in specs.items():
      if self.params[name].shape != spec.shape:
        error_msg = f"parameter {name} has shape {self.params[name].shape}, expected {spec.shape}"
        raise ShapeError(error_msg)

  def p(self, name: str) -> Tensor:
    """Look up one parameter."""
    return self.params[name]

  def _linear(self, prefix: str, x: Tensor) -> Tensor:
    """Affine map with parameters `{prefix}.weight` and `{prefix}.bias`."""
    return F.affine(x, self.p(f"{prefix}.weight"), self.p(f"{prefix}.bias"))

  def replace_params(self, params: dict[str, Tensor]) -> Self:
    """Shallow copy that uses `params` in place of the matching entries."""
    clone = copy.copy(self)
    clone.params = {**self.params, **params}
    return clone

  def zero_grad(self) -> None:
    for tensor in self.params.values():
      tensor.zero_grad()
