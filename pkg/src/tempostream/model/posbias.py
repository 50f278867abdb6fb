"""Relative temporal-spatial position bias for cross-attention logits.

A small MLP projects cuboid coordinate differences (dt, dh, dw) to one
bias per attention head. The cached table covers dt in [0, span] and
dh/dw in [-win, +win]; temporal differences are measured in frame units
of the proposal indices. Negative dt (key temporally after query) is
never embedded: such logits are masked to an effective -inf.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from .. import numerics as nm
from ..numerics import Tensor
from .windows import WindowConfig

__all__ = ["BiasTable", "build_bias_table", "project_coordinate", "MASK_VALUE"]

MASK_VALUE = -1e9

# fixed coordinate scales keep MLP inputs O(1) without tying the bias to
# any particular proposal (the function must be continuous across spans)
T_COORD_SCALE = 16.0


def _coord_inputs(dts, dhs, dws, win_h: int, win_w: int) -> np.ndarray:
    grid = np.stack(np.meshgrid(dts, dhs, dws, indexing="ij"), axis=-1).astype(np.float64)
    grid[..., 0] /= T_COORD_SCALE
    grid[..., 1] /= max(1, win_h)
    grid[..., 2] /= max(1, win_w)
    return grid.reshape(-1, 3)


def project_coordinate(params: dict, dt: float, dh: float, dw: float,
                       win_h: int, win_w: int) -> np.ndarray:
    """Per-head bias of a single coordinate triple (test/verification path)."""
    x = np.array([dt / T_COORD_SCALE, dh / max(1, win_h), dw / max(1, win_w)])
    hdn = np.maximum(0.0, x @ params["bias.w1"].data + params["bias.b1"].data)
    return hdn @ params["bias.w2"].data + params["bias.b2"].data


@dataclass
class BiasTable:
    """Cached bias for all (dt, dh, dw) plus lookup bookkeeping."""

    table: Tensor  # [span+1, 2*win_h+1, 2*win_w+1, heads]
    span: int
    win: WindowConfig
    heads: int

    def logit_bias(self, query_frames: list[int], key_frames: list[int]) -> tuple[Tensor, np.ndarray]:
        """Bias and additive mask for one query-window/key-set token layout.

        Token order is (t, h, w) row-major on both sides. Query slots
        beyond ``len(query_frames)`` (temporal padding) reuse dt=0 rows;
        their outputs are cropped by window reverse. Returns
        (bias [heads, q_tokens, k_tokens], mask [q_tokens, k_tokens]).
        """
        wt, wh, ww = self.win.win_t, self.win.win_h, self.win.win_w
        qf = np.asarray(list(query_frames) + [query_frames[-1]] * (wt - len(query_frames)))
        kf = np.asarray(key_frames)
        dt = qf[:, None] - kf[None, :]
        if dt.max() > self.span:
            raise ConfigError(
                f"temporal difference {dt.max()} exceeds bias table span {self.span}"
            )
        causal = dt < 0
        dt_idx = np.clip(dt, 0, self.span)

        hh = np.arange(wh)
        dh_idx = hh[:, None] - hh[None, :] + wh  # table covers [-wh, wh]
        wwr = np.arange(ww)
        dw_idx = wwr[:, None] - wwr[None, :] + ww

        dh_extent = 2 * wh + 1
        dw_extent = 2 * ww + 1
        # flat index over (dt, dh, dw), expanded to token grids
        flat = (
            dt_idx[:, None, None, :, None, None] * (dh_extent * dw_extent)
            + dh_idx[None, :, None, None, :, None] * dw_extent
            + dw_idx[None, None, :, None, None, :]
        )
        tk = kf.size * wh * ww
        flat = flat.reshape(wt * wh * ww, tk)

        table_flat = nm.reshape(self.table, ((self.span + 1) * dh_extent * dw_extent, self.heads))
        bias = nm.gather(table_flat, flat.reshape(-1), axis=0)
        bias = nm.reshape(bias, (wt * wh * ww, tk, self.heads))
        bias = nm.transpose(bias, (2, 0, 1))

        mask = np.where(
            np.broadcast_to(
                causal[:, None, None, :, None, None],
                (wt, wh, ww, kf.size, wh, ww),
            ).reshape(wt * wh * ww, tk),
            MASK_VALUE,
            0.0,
        )
        return bias, mask


def build_bias_table(params: dict, span: int, win: WindowConfig, heads: int) -> BiasTable:
    """Run the projector MLP over the full coordinate cuboid."""
    if span < 0:
        raise ConfigError(f"bias table span must be >= 0, got {span}")
    dts = np.arange(0, span + 1)
    dhs = np.arange(-win.win_h, win.win_h + 1)
    dws = np.arange(-win.win_w, win.win_w + 1)
    coords = nm.tensor(_coord_inputs(dts, dhs, dws, win.win_h, win.win_w))
    hdn = nm.relu(nm.add(nm.matmul(coords, params["bias.w1"]), params["bias.b1"]))
    out = nm.add(nm.matmul(hdn, params["bias.w2"]), params["bias.b2"])
    table = nm.reshape(out, (span + 1, 2 * win.win_h + 1, 2 * win.win_w + 1, heads))
    return BiasTable(table=table, span=span, win=win, heads=heads)
