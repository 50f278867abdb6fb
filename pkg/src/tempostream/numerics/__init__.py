"""Minimal dense-tensor kernel with reverse-mode differentiation."""

from .tensor import (
    Tape,
    Tensor,
    backward,
    default_dtype,
    ones,
    set_default_dtype,
    tensor,
    zeros,
)
from .ops import (
    absolute,
    add,
    broadcast_to,
    concat,
    exp,
    gather,
    layer_norm,
    log,
    matmul,
    mul,
    narrow,
    neg,
    reduce_mean,
    reduce_sum,
    relu,
    reshape,
    sigmoid,
    softmax,
    sub,
    transpose,
)
from .gradcheck import grad_check

__all__ = [
    "Tape", "Tensor", "backward", "default_dtype", "ones", "set_default_dtype",
    "tensor", "zeros", "absolute", "add", "broadcast_to", "concat", "exp",
    "gather", "layer_norm", "log", "matmul", "mul", "narrow", "neg",
    "reduce_mean", "reduce_sum", "relu", "reshape", "sigmoid", "softmax",
    "sub", "transpose", "grad_check",
]
