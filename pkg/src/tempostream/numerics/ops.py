"""Differentiable primitives over :class:`Tensor`.

Broadcasting is deliberately restricted: operand shapes must be equal,
scalar, or a trailing suffix of the other operand (leading batch dims).
Anything else goes through an explicit :func:`broadcast_to`.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, NumericError, ShapeError
from .tensor import Tensor, _OPS, active_tape, TapeNode

__all__ = [
    "add", "sub", "neg", "mul", "matmul", "reshape", "transpose", "gather",
    "concat", "narrow", "broadcast_to", "reduce_sum", "reduce_mean",
    "softmax", "exp", "log", "absolute", "relu", "sigmoid", "layer_norm",
]


def _wrap(x) -> Tensor:
    if isinstance(x, Tensor):
        return x
    from .tensor import tensor

    return tensor(x)


def _emit(op: str, inputs: tuple[Tensor, ...], out_data: np.ndarray, backward_fn) -> Tensor:
    out = Tensor(out_data, requires_grad=any(t.requires_grad for t in inputs))
    tape = active_tape()
    if tape is not None and out.requires_grad:
        tape.record(TapeNode(op, inputs, out, backward_fn))
    return out


def _check_suffix_shapes(op: str, a: Tensor, b: Tensor) -> None:
    sa, sb = a.shape, b.shape
    if sa == sb or a.size == 1 or b.size == 1:
        return
    small, big = (sa, sb) if len(sa) <= len(sb) else (sb, sa)
    if len(small) > 0 and big[len(big) - len(small):] == small:
        return
    raise ShapeError(f"{op}: shapes {sa} and {sb} are not equal/scalar/leading-broadcast")


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a cotangent down to ``shape`` after numpy-style broadcasting."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def add(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    _check_suffix_shapes("add", a, b)
    out = a.data + b.data

    def bwd(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _emit("add", (a, b), out, bwd)


def sub(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    _check_suffix_shapes("sub", a, b)
    out = a.data - b.data

    def bwd(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return _emit("sub", (a, b), out, bwd)


def neg(a) -> Tensor:
    a = _wrap(a)
    return _emit("neg", (a,), -a.data, lambda g: (-g,))


def mul(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    _check_suffix_shapes("mul", a, b)
    out = a.data * b.data
    ad, bd = a.data, b.data

    def bwd(g):
        return _unbroadcast(g * bd, a.shape), _unbroadcast(g * ad, b.shape)

    return _emit("mul", (a, b), out, bwd)


def matmul(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError(f"matmul needs >=2-d operands, got {a.shape} @ {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul inner extents differ: {a.shape} @ {b.shape}")
    try:
        out = np.matmul(a.data, b.data)
    except ValueError as exc:
        raise ShapeError(f"matmul batch dims incompatible: {a.shape} @ {b.shape}") from exc
    ad, bd = a.data, b.data

    def bwd(g):
        ga = np.matmul(g, np.swapaxes(bd, -1, -2))
        gb = np.matmul(np.swapaxes(ad, -1, -2), g)
        return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)

    return _emit("matmul", (a, b), out, bwd)


def reshape(a, shape) -> Tensor:
    a = _wrap(a)
    shape = tuple(shape)
    try:
        out = a.data.reshape(shape)
    except ValueError as exc:
        raise ShapeError(f"cannot reshape {a.shape} to {shape}") from exc
    src = a.shape
    return _emit("reshape", (a,), out, lambda g: (g.reshape(src),))


def transpose(a, axes) -> Tensor:
    a = _wrap(a)
    axes = tuple(axes)
    if sorted(axes) != list(range(a.ndim)):
        raise ShapeError(f"bad permutation {axes} for ndim {a.ndim}")
    inv = tuple(np.argsort(axes))
    out = np.transpose(a.data, axes)
    return _emit("transpose", (a,), out, lambda g: (np.transpose(g, inv),))


def gather(a, indices, axis: int = 0) -> Tensor:
    """Index-select along ``axis`` with an integer index array."""
    a = _wrap(a)
    idx = np.asarray(indices)
    if not np.issubdtype(idx.dtype, np.integer):
        raise ShapeError("gather indices must be integers")
    if idx.ndim < 1:
        raise ShapeError("gather indices must be an array (ndim >= 1)")
    n = a.shape[axis]
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise ShapeError(f"gather index out of range for extent {n}")
    out = np.take(a.data, idx, axis=axis)
    src_shape = a.shape

    def bwd(g):
        buf = np.zeros(src_shape, dtype=g.dtype)
        moved = np.moveaxis(buf, axis, 0)
        # indices replace `axis` with idx.ndim axes at that position
        upd = np.moveaxis(g, tuple(range(axis, axis + idx.ndim)), tuple(range(idx.ndim)))
        np.add.at(moved, idx, upd)
        return (buf,)

    return _emit("gather", (a,), out, bwd)


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = [_wrap(t) for t in tensors]
    if not tensors:
        raise ShapeError("concat of empty list")
    out = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def bwd(g):
        return tuple(np.split(g, splits, axis=axis))

    return _emit("concat", tuple(tensors), out, bwd)


def narrow(a, axis: int, start: int, length: int) -> Tensor:
    """Contiguous slice [start, start+length) along one axis."""
    a = _wrap(a)
    if start < 0 or start + length > a.shape[axis]:
        raise ShapeError(f"narrow [{start}:{start + length}] outside extent {a.shape[axis]}")
    sl = [slice(None)] * a.ndim
    sl[axis] = slice(start, start + length)
    sl = tuple(sl)
    out = a.data[sl]
    src_shape = a.shape

    def bwd(g):
        buf = np.zeros(src_shape, dtype=g.dtype)
        buf[sl] = g
        return (buf,)

    return _emit("narrow", (a,), out, bwd)


def broadcast_to(a, shape) -> Tensor:
    a = _wrap(a)
    shape = tuple(shape)
    try:
        out = np.broadcast_to(a.data, shape).copy()
    except ValueError as exc:
        raise ShapeError(f"cannot broadcast {a.shape} to {shape}") from exc
    src = a.shape
    return _emit("broadcast_to", (a,), out, lambda g: (_unbroadcast(g, src),))


def _norm_axis(axis, ndim):
    if axis is None:
        return None
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(ax % ndim for ax in axis)


def reduce_sum(a, axis=None, keepdims: bool = False) -> Tensor:
    a = _wrap(a)
    axis = _norm_axis(axis, a.ndim)
    out = a.data.sum(axis=axis, keepdims=keepdims)
    src_shape = a.shape

    def bwd(g):
        if axis is None:
            return (np.broadcast_to(g, src_shape).copy(),)
        gg = g
        if not keepdims:
            gg = np.expand_dims(g, axis)
        return (np.broadcast_to(gg, src_shape).copy(),)

    return _emit("sum", (a,), np.asarray(out), bwd)


def reduce_mean(a, axis=None, keepdims: bool = False) -> Tensor:
    a = _wrap(a)
    ax = _norm_axis(axis, a.ndim)
    n = a.size if ax is None else int(np.prod([a.shape[i] for i in ax]))
    return mul(reduce_sum(a, axis=axis, keepdims=keepdims), 1.0 / n)


def softmax(a, axis: int = -1) -> Tensor:
    a = _wrap(a)
    if np.isnan(a.data).any():
        raise NumericError("NaN input to softmax")
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def bwd(g):
        dot = (g * out).sum(axis=axis, keepdims=True)
        return (out * (g - dot),)

    return _emit("softmax", (a,), out, bwd)


def exp(a) -> Tensor:
    a = _wrap(a)
    out = np.exp(a.data)
    return _emit("exp", (a,), out, lambda g: (g * out,))


def log(a) -> Tensor:
    a = _wrap(a)
    if (a.data <= 0).any():
        raise NumericError("log of non-positive value")
    ad = a.data
    return _emit("log", (a,), np.log(ad), lambda g: (g / ad,))


def absolute(a) -> Tensor:
    a = _wrap(a)
    ad = a.data
    return _emit("abs", (a,), np.abs(ad), lambda g: (g * np.sign(ad),))


def relu(a) -> Tensor:
    a = _wrap(a)
    mask = a.data > 0
    return _emit("relu", (a,), a.data * mask, lambda g: (g * mask,))


def sigmoid(a) -> Tensor:
    a = _wrap(a)
    out = 1.0 / (1.0 + np.exp(-np.clip(a.data, -500, 500)))
    return _emit("sigmoid", (a,), out, lambda g: (g * out * (1.0 - out),))


def layer_norm(a, gain, bias, eps: float = 1e-5) -> Tensor:
    """Normalize over the last (channel) axis, then affine."""
    if eps <= 0:
        raise ConfigError(f"layer_norm eps must be > 0, got {eps}")
    a, gain, bias = _wrap(a), _wrap(gain), _wrap(bias)
    c = a.shape[-1]
    if gain.shape != (c,) or bias.shape != (c,):
        raise ShapeError(f"layer_norm affine shapes {gain.shape}/{bias.shape} vs channels {c}")
    mu = a.data.mean(axis=-1, keepdims=True)
    xc = a.data - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    out = xhat * gain.data + bias.data
    gdat = gain.data

    def bwd(g):
        dxhat = g * gdat
        m1 = dxhat.mean(axis=-1, keepdims=True)
        m2 = (dxhat * xhat).mean(axis=-1, keepdims=True)
        dx = inv * (dxhat - m1 - xhat * m2)
        red = tuple(range(g.ndim - 1))
        dgain = (g * xhat).sum(axis=red)
        dbias = g.sum(axis=red)
        return dx, dgain, dbias

    return _emit("layer_norm", (a, gain, bias), out, bwd)


_OPS.update({"add": add, "sub": sub, "mul": mul, "neg": neg, "matmul": matmul})
