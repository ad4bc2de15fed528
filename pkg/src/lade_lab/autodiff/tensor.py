"""Dense float64 tensors with reverse-mode automatic differentiation.

Each Tensor holds an immutable numpy array and, if it was produced by an
operation, a reference to its parents plus a closure mapping the output
gradient to one gradient per parent. Calling backward() on a scalar walks the
graph once in reverse topological order.

Broadcasting is restricted to three cases:
- identical shapes
- a 0-d scalar against any shape
- an array of shape ``s[1:]`` against an array of shape ``s`` (leading batch dim)
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Callable, Sequence
from typing import Any

import numpy as np

from lade_lab.errors import ContractError, DimensionError, DomainError

logger = logging.getLogger(__name__)

GradFn = Callable[[np.ndarray], tuple[np.ndarray | None, ...]]

_node_ids = itertools.count()


def _freeze(values: Any) -> np.ndarray:
    array = np.array(values, dtype=np.float64)
    array.flags.writeable = False
    return array


def _broadcast_shape(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    if a == b or b == ():
        return a
    if a == ():
        return b
    if len(a) >= 1 and a[1:] == b:
        return a
    if len(b) >= 1 and b[1:] == a:
        return b
    raise DimensionError(f"cannot broadcast shapes {a} and {b}")


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Reduce a gradient of the broadcast output back to an operand's shape."""
    if grad.shape == shape:
        return grad
    if shape == ():
        return np.asarray(grad.sum())
    # operand was broadcast over the leading batch dimension
    return grad.sum(axis=0)


def _expand_reduced(grad: np.ndarray, shape: tuple[int, ...], axis: int | None) -> np.ndarray:
    if axis is None:
        return np.broadcast_to(grad, shape)
    return np.broadcast_to(np.expand_dims(grad, axis), shape)


class Tensor:
    """A node in a differentiable computation graph.

    Attributes:
        grad: Gradient of the backward root w.r.t. this tensor (None before backward)
        requires_grad: Whether gradients flow to this tensor
        node_id: Identity of the node, unique within the process

    Example:
        >>> x = Tensor([1.0, 2.0, 3.0], requires_grad=True)
        >>> loss = x.square().sum()
        >>> loss.backward()
        >>> x.grad
        array([2., 4., 6.])
    """

    __array_priority__ = 100.0

    def __init__(
        self,
        values: Any,
        requires_grad: bool = False,
        *,
        _parents: tuple[Tensor, ...] = (),
        _grad_fn: GradFn | None = None,
        _op: str = "",
    ) -> None:
        self._values = _freeze(values)
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self.node_id = next(_node_ids)
        self._parents = _parents
        self._grad_fn = _grad_fn
        self._op = _op
        self._backward_done = False

    # ------------------------------------------------------------------
    # Introspection
    # ------------------------------------------------------------------

    @property
    def values(self) -> np.ndarray:
        """Read-only view of the tensor's values."""
        return self._values

    @property
    def shape(self) -> tuple[int, ...]:
        return self._values.shape

    @property
    def ndim(self) -> int:
        return self._values.ndim

    @property
    def size(self) -> int:
        return int(self._values.size)

    def item(self) -> float:
        """Return the value of a one-element tensor as a float."""
        if self.size != 1:
            raise ContractError(f"item() needs a one-element tensor, got shape {self.shape}")
        return float(self._values.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        """Return a writable copy of the values."""
        return np.array(self._values)

    # ------------------------------------------------------------------
    # Graph construction helpers
    # ------------------------------------------------------------------

    @staticmethod
    def lift(value: Tensor | float | int | np.ndarray) -> Tensor:
        """Wrap a constant as a non-differentiable tensor."""
        if isinstance(value, Tensor):
            return value
        return Tensor(value)

    def _make(
        self,
        values: np.ndarray,
        parents: tuple[Tensor, ...],
        grad_fn: GradFn,
        op: str,
    ) -> Tensor:
        requires_grad = any(p.requires_grad for p in parents)
        return Tensor(
            values,
            requires_grad=requires_grad,
            _parents=parents if requires_grad else (),
            _grad_fn=grad_fn if requires_grad else None,
            _op=op,
        )

    def _binary(
        self,
        other: Tensor | float | int | np.ndarray,
        forward: Callable[[np.ndarray, np.ndarray], np.ndarray],
        backward: Callable[[np.ndarray, np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]],
        op: str,
    ) -> Tensor:
        rhs = Tensor.lift(other)
        _broadcast_shape(self.shape, rhs.shape)
        a, b = self._values, rhs._values

        def grad_fn(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            ga, gb = backward(g, a, b)
            return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)

        return self._make(forward(a, b), (self, rhs), grad_fn, op)

    # ------------------------------------------------------------------
    # Elementwise arithmetic
    # ------------------------------------------------------------------

    def __add__(self, other: Tensor | float | int | np.ndarray) -> Tensor:
        return self._binary(other, np.add, lambda g, a, b: (g, g), "add")

    def __radd__(self, other: float | int | np.ndarray) -> Tensor:
        return Tensor.lift(other) + self

    def __sub__(self, other: Tensor | float | int | np.ndarray) -> Tensor:
        return self._binary(other, np.subtract, lambda g, a, b: (g, -g), "sub")

    def __rsub__(self, other: float | int | np.ndarray) -> Tensor:
        return Tensor.lift(other) - self

    def __mul__(self, other: Tensor | float | int | np.ndarray) -> Tensor:
        return self._binary(
            other, np.multiply, lambda g, a, b: (g * b, g * a), "mul"
        )

    def __rmul__(self, other: float | int | np.ndarray) -> Tensor:
        return Tensor.lift(other) * self

    def __truediv__(self, other: Tensor | float | int | np.ndarray) -> Tensor:
        return self._binary(
            other, np.divide, lambda g, a, b: (g / b, -g * a / (b * b)), "div"
        )

    def __rtruediv__(self, other: float | int | np.ndarray) -> Tensor:
        return Tensor.lift(other) / self

    def __neg__(self) -> Tensor:
        return self._make(-self._values, (self,), lambda g: (-g,), "neg")

    def add(self, other: Tensor | float) -> Tensor:
        return self + other

    def sub(self, other: Tensor | float) -> Tensor:
        return self - other

    def mul(self, other: Tensor | float) -> Tensor:
        return self * other

    def div(self, other: Tensor | float) -> Tensor:
        return self / other

    def neg(self) -> Tensor:
        return -self

    # ------------------------------------------------------------------
    # Elementwise functions
    # ------------------------------------------------------------------

    def exp(self) -> Tensor:
        out = np.exp(self._values)
        return self._make(out, (self,), lambda g: (g * out,), "exp")

    def log(self) -> Tensor:
        """Natural logarithm.

        Raises:
            DomainError: If any value is not strictly positive
        """
        x = self._values
        if np.any(~(x > 0)):
            raise DomainError(f"log of non-positive value (min={np.min(x)!r})")
        return self._make(np.log(x), (self,), lambda g: (g / x,), "log")

    def square(self) -> Tensor:
        x = self._values
        return self._make(x * x, (self,), lambda g: (2.0 * x * g,), "square")

    def relu(self) -> Tensor:
        x = self._values
        mask = x > 0
        return self._make(np.where(mask, x, 0.0), (self,), lambda g: (g * mask,), "relu")

    # ------------------------------------------------------------------
    # Linear algebra
    # ------------------------------------------------------------------

    def __matmul__(self, other: Tensor | np.ndarray) -> Tensor:
        rhs = Tensor.lift(other)
        a, b = self._values, rhs._values
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
            raise DimensionError(f"matmul shape mismatch: {a.shape} @ {b.shape}")
        return self._make(
            a @ b, (self, rhs), lambda g: (g @ b.T, a.T @ g), "matmul"
        )

    def matmul(self, other: Tensor | np.ndarray) -> Tensor:
        return self @ other

    # ------------------------------------------------------------------
    # Reductions
    # ------------------------------------------------------------------

    def sum(self, axis: int | None = None) -> Tensor:
        shape = self.shape
        return self._make(
            np.sum(self._values, axis=axis),
            (self,),
            lambda g: (_expand_reduced(g, shape, axis),),
            "sum",
        )

    def mean(self, axis: int | None = None) -> Tensor:
        count = self.size if axis is None else self.shape[axis]
        return self.sum(axis) / float(count)

    def max(self, axis: int | None = None) -> Tensor:
        """Max-reduce; the gradient flows to the first maximal entry only."""
        x = self._values
        if axis is None:
            flat_index = int(np.argmax(x))
            mask = np.zeros(x.size)
            mask[flat_index] = 1.0
            mask = mask.reshape(x.shape)
        else:
            winners = np.expand_dims(np.argmax(x, axis=axis), axis)
            mask = np.zeros_like(x)
            np.put_along_axis(mask, winners, 1.0, axis=axis)
        shape = self.shape
        return self._make(
            np.max(x, axis=axis),
            (self,),
            lambda g: (_expand_reduced(g, shape, axis) * mask,),
            "max",
        )

    def logsumexp(self, axis: int | None = None) -> Tensor:
        """Numerically stabilized log(sum(exp(x))) via max shift."""
        x = self._values
        shift = np.max(x, axis=axis, keepdims=True)
        shift = np.where(np.isfinite(shift), shift, 0.0)
        summed = np.sum(np.exp(x - shift), axis=axis, keepdims=True)
        out_keep = np.log(summed) + shift
        out = out_keep.reshape(()) if axis is None else np.squeeze(out_keep, axis=axis)
        weights = np.exp(x - out_keep)
        shape = self.shape

        def grad_fn(g: np.ndarray) -> tuple[np.ndarray]:
            return (_expand_reduced(g, shape, axis) * weights,)

        return self._make(out, (self,), grad_fn, "logsumexp")

    # ------------------------------------------------------------------
    # Indexing
    # ------------------------------------------------------------------

    def gather(self, index: Sequence[int] | np.ndarray) -> Tensor:
        """Pick ``x[i, index[i]]`` for every row i of a 2-D tensor.

        Raises:
            DimensionError: If the tensor is not 2-D or index length differs from rows
            IndexError: If an index is out of range
        """
        x = self._values
        idx = np.asarray(index, dtype=np.int64)
        if x.ndim != 2 or idx.shape != (x.shape[0],):
            raise DimensionError(f"gather needs (N, C) values and (N,) index, got {x.shape} and {idx.shape}")
        if idx.size and (idx.min() < 0 or idx.max() >= x.shape[1]):
            raise IndexError(f"gather index out of range [0, {x.shape[1]})")
        rows = np.arange(x.shape[0])

        def grad_fn(g: np.ndarray) -> tuple[np.ndarray]:
            full = np.zeros_like(x)
            full[rows, idx] = g
            return (full,)

        return self._make(x[rows, idx], (self,), grad_fn, "gather")

    def take(self, rows: Sequence[int] | np.ndarray) -> Tensor:
        """Select rows (leading-dim entries) by integer index."""
        x = self._values
        idx = np.asarray(rows, dtype=np.int64)

        def grad_fn(g: np.ndarray) -> tuple[np.ndarray]:
            full = np.zeros_like(x)
            np.add.at(full, idx, g)
            return (full,)

        return self._make(x[idx], (self,), grad_fn, "take")

    def column(self, j: int) -> Tensor:
        """Select column j of a 2-D tensor as a 1-D tensor."""
        x = self._values
        if x.ndim != 2:
            raise DimensionError(f"column() needs a 2-D tensor, got shape {x.shape}")

        def grad_fn(g: np.ndarray) -> tuple[np.ndarray]:
            full = np.zeros_like(x)
            full[:, j] = g
            return (full,)

        return self._make(x[:, j], (self,), grad_fn, "column")

    # ------------------------------------------------------------------
    # Backward pass
    # ------------------------------------------------------------------

    def _topological_order(self) -> list[Tensor]:
        order: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if node.node_id in visited:
                continue
            visited.add(node.node_id)
            stack.append((node, True))
            for parent in node._parents:
                if parent.node_id not in visited:
                    stack.append((parent, False))
        return order

    def backward(self) -> None:
        """Populate ``grad`` on every node of the graph rooted at this tensor.

        The seed gradient is 1. Each graph supports a single backward pass:
        afterwards every interior node is consumed, so backward from the root
        or from any intermediate node raises. Leaves stay reusable.

        Raises:
            ContractError: If the tensor is not scalar or backward already ran
        """
        if self.size != 1:
            raise ContractError(f"backward needs a scalar loss, got shape {self.shape}")
        order = self._topological_order()
        if any(node._backward_done for node in order):
            raise ContractError("backward already ran on this graph")

        grads: dict[int, np.ndarray] = {node.node_id: np.zeros(node.shape) for node in order}
        grads[self.node_id] = np.ones(self.shape)

        for node in reversed(order):
            if node._grad_fn is None:
                continue
            parent_grads = node._grad_fn(grads[node.node_id])
            for parent, grad in zip(node._parents, parent_grads, strict=True):
                if parent.requires_grad and grad is not None:
                    grads[parent.node_id] = grads[parent.node_id] + grad

        for node in order:
            node.grad = grads[node.node_id]
            if node._grad_fn is not None:
                node._backward_done = True
        logger.debug("backward visited %d nodes", len(order))

    def __repr__(self) -> str:
        """String representation."""
        return f"Tensor(shape={self.shape}, op={self._op or 'leaf'}, requires_grad={self.requires_grad})"


def as_tensor(value: Tensor | Any, requires_grad: bool = False) -> Tensor:
    """Return value unchanged if it is a Tensor, otherwise wrap it."""
    if isinstance(value, Tensor):
        return value
    return Tensor(value, requires_grad=requires_grad)
