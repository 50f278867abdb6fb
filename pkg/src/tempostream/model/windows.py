"""3D window partitioning of [T, H, W, C] feature volumes.

Windows are non-overlapping; remainders are zero-padded and tracked by
a validity mask. No window shifting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, ShapeError
from .. import numerics as nm
from ..numerics import Tensor

__all__ = ["WindowConfig", "window_partition", "window_reverse", "window_grid"]


@dataclass(frozen=True)
class WindowConfig:
    win_t: int
    win_h: int
    win_w: int

    def __post_init__(self) -> None:
        if min(self.win_t, self.win_h, self.win_w) < 1:
            raise ConfigError("window extents must be >= 1")

    @property
    def tokens(self) -> int:
        return self.win_t * self.win_h * self.win_w


def window_grid(shape: tuple[int, int, int], cfg: WindowConfig) -> tuple[int, int, int]:
    """Number of windows along (T, H, W)."""
    t, h, w = shape
    return (-(-t // cfg.win_t), -(-h // cfg.win_h), -(-w // cfg.win_w))


def _pad_axis(x: Tensor, axis: int, target: int) -> Tensor:
    if x.shape[axis] == target:
        return x
    pad_shape = list(x.shape)
    pad_shape[axis] = target - x.shape[axis]
    return nm.concat([x, nm.zeros(pad_shape, dtype=x.data.dtype)], axis=axis)


def window_partition(x: Tensor, cfg: WindowConfig) -> tuple[Tensor, np.ndarray]:
    """[T, H, W, C] -> (tokens [nWin, win_t*win_h*win_w, C], valid mask).

    Window order is t-major then h then w; token order inside a window
    is (t, h, w) row-major.
    """
    if x.ndim != 4:
        raise ShapeError(f"window_partition expects [T,H,W,C], got {x.shape}")
    t, h, w, c = x.shape
    nt, nh, nw = window_grid((t, h, w), cfg)
    xp = _pad_axis(x, 0, nt * cfg.win_t)
    xp = _pad_axis(xp, 1, nh * cfg.win_h)
    xp = _pad_axis(xp, 2, nw * cfg.win_w)
    xp = nm.reshape(xp, (nt, cfg.win_t, nh, cfg.win_h, nw, cfg.win_w, c))
    xp = nm.transpose(xp, (0, 2, 4, 1, 3, 5, 6))
    tokens = nm.reshape(xp, (nt * nh * nw, cfg.tokens, c))

    valid = np.zeros((nt * cfg.win_t, nh * cfg.win_h, nw * cfg.win_w), dtype=bool)
    valid[:t, :h, :w] = True
    valid = valid.reshape(nt, cfg.win_t, nh, cfg.win_h, nw, cfg.win_w)
    valid = valid.transpose(0, 2, 4, 1, 3, 5).reshape(nt * nh * nw, cfg.tokens)
    return tokens, valid


def window_reverse(tokens: Tensor, cfg: WindowConfig, shape: tuple[int, int, int]) -> Tensor:
    """Exact inverse of :func:`window_partition` on the unpadded region."""
    t, h, w = shape
    nt, nh, nw = window_grid((t, h, w), cfg)
    if tokens.ndim != 3 or tokens.shape[0] != nt * nh * nw or tokens.shape[1] != cfg.tokens:
        raise ShapeError(
            f"tokens {tokens.shape} do not match windows {(nt, nh, nw)} of {cfg}"
        )
    c = tokens.shape[2]
    x = nm.reshape(tokens, (nt, nh, nw, cfg.win_t, cfg.win_h, cfg.win_w, c))
    x = nm.transpose(x, (0, 3, 1, 4, 2, 5, 6))
    x = nm.reshape(x, (nt * cfg.win_t, nh * cfg.win_h, nw * cfg.win_w, c))
    x = nm.narrow(x, 0, 0, t)
    x = nm.narrow(x, 1, 0, h)
    x = nm.narrow(x, 2, 0, w)
    return x
