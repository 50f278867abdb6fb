"""Finite-difference verification of reverse-mode gradients."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..errors import NumericError
from .tensor import Tape, Tensor, backward, tensor

__all__ = ["grad_check"]


def grad_check(f: Callable[[Tensor], Tensor], x: Tensor, h: float = 1e-5) -> float:
    """Max relative error between tape gradients and central differences.

    ``f`` must be scalar-valued. Run in 64-bit mode; central differences
    are meaningless at float32.
    """
    probe = tensor(x.data.astype(np.float64), requires_grad=True)
    with Tape() as tape:
        out = f(probe)
    if out.data.size != 1:
        raise NumericError("grad_check target must be scalar-valued")
    if not np.isfinite(out.data).all():
        raise NumericError("non-finite function value in grad_check")
    backward(tape, out)
    analytic = probe.grad if probe.grad is not None else np.zeros_like(probe.data)

    numeric = np.zeros_like(probe.data)
    flat = probe.data.reshape(-1)
    num_flat = numeric.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        f_plus = f(Tensor(probe.data.copy())).item()
        flat[i] = orig - h
        f_minus = f(Tensor(probe.data.copy())).item()
        flat[i] = orig
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise NumericError("non-finite function value in grad_check")
        num_flat[i] = (f_plus - f_minus) / (2.0 * h)

    denom = np.maximum(1.0, np.abs(analytic))
    return float(np.max(np.abs(analytic - numeric) / denom)) if flat.size else 0.0
