"""Dense real tensors recorded on a tape for reverse-mode differentiation.

A `Tape` is activated with ``with Tape() as tape:``; every primitive applied
while it is active to at least one tensor that requires a gradient is appended
to the tape. Nodes are appended in execution order, which is a topological
order of the graph. Outside a tape primitives still compute, but nothing is
recorded (inference mode).
"""
from __future__ import annotations

from collections.abc import Callable, Iterator, Sequence
from contextlib import contextmanager
from contextvars import ContextVar
from enum import Enum

import numpy as np

from app.core.errors import NumericError, PrecisionError, ShapeError, StepNetError


class Precision(str, Enum):
  """Floating point width shared by every tensor of one graph."""

  SINGLE = "single"
  DOUBLE = "double"

  @property
  def dtype(self) -> np.dtype:
    """Numpy dtype for this precision."""
    return np.dtype(np.float32 if self is Precision.SINGLE else np.float64)

  @classmethod
  def of(cls, array: np.ndarray) -> Precision:
    """Precision of an existing array."""
    return cls.SINGLE if array.dtype == np.float32 else cls.DOUBLE


_ACTIVE_TAPE: ContextVar[Tape | None] = ContextVar("active_tape", default=None)

BackwardFn = Callable[[np.ndarray, np.ndarray], Sequence[np.ndarray | None]]
ForwardFn = Callable[..., np.ndarray]


def _check_finite(array: np.ndarray, what: str) -> None:
  if not np.all(np.isfinite(array)):
    msg = f"{what} holds non-finite values"
    raise NumericError(msg)


class Tensor:
  """Immutable real array with an optional gradient slot."""

  __slots__ = ("_node", "data", "grad", "name", "requires_grad")
  __array_priority__ = 1000

  def __init__(
    self,
    data: np.ndarray | Sequence | float,
    *,
    requires_grad: bool = False,
    precision: Precision | None = None,
    name: str | None = None,
  ) -> None:
    """Copy `data` into a read-only array of the requested precision."""
    array = np.array(data, dtype=precision.dtype if precision else None)
    if array.dtype not in (np.float32, np.float64):
      array = array.astype(np.float64)
    _check_finite(array, name or "tensor")
    array.setflags(write=False)
    self.data = array
    self.requires_grad = requires_grad
    self.grad: np.ndarray | None = None
    self.name = name
    self._node: Node | None = None

  @classmethod
  def _wrap(cls, array: np.ndarray) -> Tensor:
    out = cls.__new__(cls)
    array.setflags(write=False)
    out.data = array
    out.requires_grad = False
    out.grad = None
    out.name = None
    out._node = None
    return out

  @property
  def shape(self) -> tuple[int, ...]:
    return self.data.shape

  @property
  def ndim(self) -> int:
    return self.data.ndim

  @property
  def size(self) -> int:
    return self.data.size

  @property
  def precision(self) -> Precision:
    return Precision.of(self.data)

  @property
  def is_leaf(self) -> bool:
    return self._node is None

  @property
  def T(self) -> Tensor:  # noqa: N802
    return functional.transpose(self)

  def numpy(self) -> np.ndarray:
    """Return the underlying (read-only) array."""
    return self.data

  def item(self) -> float:
    """Return the value of a one-element tensor."""
    return float(self.data.reshape(-1)[0])

  def zero_grad(self) -> None:
    self.grad = None

  def __repr__(self) -> str:
    label = f" name={self.name!r}" if self.name else ""
    return f"Tensor(shape={self.shape}, precision={self.precision.value}{label})"

  def __add__(self, other: Tensor | float) -> Tensor:
    return functional.add(self, other)

  def __radd__(self, other: Tensor | float) -> Tensor:
    return functional.add(other, self)

  def __sub__(self, other: Tensor | float) -> Tensor:
    return functional.sub(self, other)

  def __rsub__(self, other: Tensor | float) -> Tensor:
    return functional.sub(other, self)

  def __mul__(self, other: Tensor | float) -> Tensor:
    return functional.mul(self, other)

  def __rmul__(self, other: Tensor | float) -> Tensor:
    return functional.mul(other, self)

  def __neg__(self) -> Tensor:
    return functional.scale(self, -1.0)

  def __matmul__(self, other: Tensor) -> Tensor:
    return functional.matmul(self, other)

  def __getitem__(self, index: object) -> Tensor:
    return functional.take(self, index)

  __hash__ = object.__hash__


class Node:
  """One recorded primitive application."""

  __slots__ = ("backward_fn", "forward_fn", "index", "inputs", "op", "output")

  def __init__(
    self,
    op: str,
    inputs: tuple[Tensor, ...],
    output: Tensor,
    forward_fn: ForwardFn,
    backward_fn: BackwardFn,
  ) -> None:
    self.op = op
    self.inputs = inputs
    self.output = output
    self.forward_fn = forward_fn
    self.backward_fn = backward_fn
    self.index = -1


class Tape:
  """Ordered record of primitive applications."""

  def __init__(self) -> None:
    self.nodes: list[Node] = []
    self._token = None

  def __enter__(self) -> Tape:
    self._token = _ACTIVE_TAPE.set(self)
    return self

  def __exit__(self, *exc: object) -> None:
    _ACTIVE_TAPE.reset(self._token)
    self._token = None

  def __len__(self) -> int:
    return len(self.nodes)

  def record(self, node: Node) -> None:
    node.index = len(self.nodes)
    self.nodes.append(node)

  def replay(self) -> bool:
    """Recompute every node from its inputs; True if all outputs match bitwise."""
    for node in self.nodes:
      recomputed = node.forward_fn(*(t.data for t in node.inputs))
      if not np.array_equal(np.asarray(recomputed), node.output.data):
        return False
    return True

  def backward(self, seed: Tensor) -> list[Tensor]:
    """Reverse-mode accumulation from `seed`; see `backward`."""
    return backward(self, seed)


def active_tape() -> Tape | None:
  """Return the tape recording in the current context, if any."""
  return _ACTIVE_TAPE.get()


@contextmanager
def no_tape() -> Iterator[None]:
  """Suspend recording inside the block."""
  token = _ACTIVE_TAPE.set(None)
  try:
    yield
  finally:
    _ACTIVE_TAPE.reset(token)


def apply(
  op: str,
  inputs: Sequence[Tensor],
  forward_fn: ForwardFn,
  backward_fn: BackwardFn,
) -> Tensor:
  """Run a primitive and record it on the active tape.

  `backward_fn(g, out)` receives the output gradient and the output array and
  returns one gradient (or None) per input, in input order.
  """
  inputs = tuple(inputs)
  dtypes = {t.data.dtype for t in inputs}
  if len(dtypes) > 1:
    msg = f"{op}: mixed precisions {sorted(str(d) for d in dtypes)} in one graph"
    raise PrecisionError(msg)
  out = np.asarray(forward_fn(*(t.data for t in inputs)))
  if inputs:
    out = out.astype(inputs[0].data.dtype, copy=False)
  _check_finite(out, f"{op} output")
  result = Tensor._wrap(out)  # noqa: SLF001
  tape = _ACTIVE_TAPE.get()
  if tape is not None and any(t.requires_grad for t in inputs):
    result.requires_grad = True
    node = Node(op, inputs, result, forward_fn, backward_fn)
    tape.record(node)
    result._node = node  # noqa: SLF001
  return result


def backward(tape: Tape, seed: Tensor) -> list[Tensor]:
  """Accumulate d(seed)/d(leaf) into ``leaf.grad`` for every reachable leaf.

  Contributions of a tensor used several times are summed in reverse tape
  order, so two backward passes over the same tape give identical bits.

  Returns:
      The leaves that received a gradient, in first-seen order.

  """
  if seed.size != 1:
    msg = f"backward seed must be scalar, got shape {seed.shape}"
    raise ShapeError(msg)
  node = seed._node  # noqa: SLF001
  if node is None or node.index >= len(tape.nodes) or tape.nodes[node.index] is not node:
    msg = "backward seed is not recorded on this tape"
    raise StepNetError(msg)

  grads: dict[int, np.ndarray] = {id(seed): np.ones_like(seed.data)}
  leaves: dict[int, Tensor] = {}
  for current in reversed(tape.nodes[: node.index + 1]):
    g = grads.pop(id(current.output), None)
    if g is None:
      continue
    input_grads = current.backward_fn(g, current.output.data)
    for tensor, grad in zip(current.inputs, input_grads, strict=True):
      if grad is None or not tensor.requires_grad:
        continue
      key = id(tensor)
      grads[key] = grads[key] + grad if key in grads else grad
      if tensor.is_leaf:
        leaves.setdefault(key, tensor)

  for key, leaf in leaves.items():
    grad = np.asarray(grads[key], dtype=leaf.data.dtype).reshape(leaf.shape)
    leaf.grad = grad if leaf.grad is None else leaf.grad + grad
  return list(leaves.values())


from app.nn import functional
