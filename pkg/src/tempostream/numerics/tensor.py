"""Dense tensor with tape-based reverse-mode differentiation.

The op set is exactly what the forecasting model needs; anything else is
out of scope. Ops record onto the active ``Tape`` (a ``with`` context)
when any input requires grad. Creation order on the tape is topological
by construction, so the backward pass is a single reverse sweep.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import NumericError, ShapeError

__all__ = ["Tensor", "Tape", "tensor", "zeros", "ones", "set_default_dtype", "default_dtype", "backward"]

_DEFAULT_DTYPE = np.float64


def set_default_dtype(dtype) -> None:
    """Select 64-bit (test) or 32-bit (run) arithmetic for new tensors."""
    global _DEFAULT_DTYPE
    dt = np.dtype(dtype)
    if dt not in (np.dtype(np.float64), np.dtype(np.float32)):
        raise NumericError(f"unsupported dtype {dtype}")
    _DEFAULT_DTYPE = dt.type


def default_dtype():
    return _DEFAULT_DTYPE


class Tensor:
    """Immutable-by-convention dense array plus grad bookkeeping."""

    __slots__ = ("data", "requires_grad", "grad")

    def __init__(self, data: np.ndarray, requires_grad: bool = False):
        if data.ndim > 0 and any(s < 1 for s in data.shape):
            raise ShapeError(f"zero-extent shape {data.shape}")
        self.data = data
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(()))

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # operator sugar; implementations live in ops.py (set at import time)
    def __add__(self, other):
        return _OPS["add"](self, other)

    def __sub__(self, other):
        return _OPS["sub"](self, other)

    def __mul__(self, other):
        return _OPS["mul"](self, other)

    def __rmul__(self, other):
        return _OPS["mul"](self, other)

    def __neg__(self):
        return _OPS["neg"](self)

    def __matmul__(self, other):
        return _OPS["matmul"](self, other)


_OPS: dict[str, Callable] = {}


@dataclass
class TapeNode:
    """One recorded primitive application."""

    op: str
    inputs: tuple[Tensor, ...]
    output: Tensor
    backward_fn: Callable[[np.ndarray], tuple]
    # backward_fn maps the output cotangent to one cotangent per input
    # (None for inputs that do not require grad)


@dataclass
class Tape:
    """Ordered record of primitive applications for one logical stream."""

    nodes: list[TapeNode] = field(default_factory=list)

    def __enter__(self) -> "Tape":
        _TAPE_STACK.append(self)
        return self

    def __exit__(self, *exc) -> None:
        popped = _TAPE_STACK.pop()
        assert popped is self

    def record(self, node: TapeNode) -> None:
        self.nodes.append(node)


_TAPE_STACK: list[Tape] = []


def active_tape() -> Tape | None:
    return _TAPE_STACK[-1] if _TAPE_STACK else None


def tensor(data, requires_grad: bool = False, dtype=None) -> Tensor:
    arr = np.asarray(data, dtype=dtype or _DEFAULT_DTYPE)
    return Tensor(arr, requires_grad=requires_grad)


def zeros(shape, requires_grad: bool = False, dtype=None) -> Tensor:
    return Tensor(np.zeros(shape, dtype=dtype or _DEFAULT_DTYPE), requires_grad)


def ones(shape, requires_grad: bool = False, dtype=None) -> Tensor:
    return Tensor(np.ones(shape, dtype=dtype or _DEFAULT_DTYPE), requires_grad)


def backward(tape: Tape, loss: Tensor) -> None:
    """Reverse sweep over the tape, accumulating ``.grad`` on every tensor
    that requires grad. ``loss`` must be scalar."""
    if loss.data.size != 1:
        raise ShapeError(f"loss must be scalar, got shape {loss.shape}")
    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(tape.nodes):
        out_grad = grads.pop(id(node.output), None)
        if out_grad is None:
            continue
        if node.output.requires_grad:
            node.output.grad = (
                out_grad if node.output.grad is None else node.output.grad + out_grad
            )
        in_grads = node.backward_fn(out_grad)
        for t, g in zip(node.inputs, in_grads):
            if g is None:
                continue
            key = id(t)
            if key in grads:
                grads[key] = grads[key] + g
            else:
                grads[key] = g
    # leaves (inputs never produced by a node) still hold pending grads
    produced = {id(n.output) for n in tape.nodes}
    for node in tape.nodes:
        for t in node.inputs:
            if t.requires_grad and id(t) not in produced:
                g = grads.get(id(t))
                if g is not None:
                    t.grad = g if t.grad is None else t.grad + g
                    grads.pop(id(t), None)
