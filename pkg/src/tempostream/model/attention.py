"""Windowed multi-head temporal cross-attention (pre-norm).

Future-frame queries attend to past/current keys inside aligned spatial
windows. Queries are independent of each other (pure cross-attention),
so the temporal chunking of queries is a grouping detail, not a
modelling one. The position-bias table adds per-head logit biases after
the 1/sqrt(d) scaling.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ShapeError
from .. import numerics as nm
from ..numerics import Tensor
from .config import ModelConfig
from .posbias import MASK_VALUE, BiasTable
from .windows import WindowConfig, window_grid, window_partition, window_reverse

__all__ = ["cross_attention_layer"]


def _split_heads(x: Tensor, heads: int) -> Tensor:
    """[nW, tok, C] -> [nW, heads, tok, C/heads]."""
    nw, tok, c = x.shape
    x = nm.reshape(x, (nw, tok, heads, c // heads))
    return nm.transpose(x, (0, 2, 1, 3))


def _merge_heads(x: Tensor) -> Tensor:
    nw, h, tok, d = x.shape
    x = nm.transpose(x, (0, 2, 1, 3))
    return nm.reshape(x, (nw, tok, h * d))


def _mlp(prefix: str, params: dict, x: Tensor) -> Tensor:
    h = nm.relu(nm.add(nm.matmul(x, params[f"{prefix}.w1"]), params[f"{prefix}.b1"]))
    return nm.add(nm.matmul(h, params[f"{prefix}.w2"]), params[f"{prefix}.b2"])


def cross_attention_layer(
    params: dict,
    layer: int,
    cfg: ModelConfig,
    queries: Tensor,
    keys: Tensor,
    values: Tensor,
    bias_table: BiasTable | None,
    query_frames: list[int],
    key_frames: list[int],
) -> Tensor:
    """One neck layer: windowed cross-attention + MLP, both residual.

    queries: [TQ, H', W', C]; keys/values: [TK, H', W', C].
    """
    if queries.shape[1:] != keys.shape[1:] or keys.shape != values.shape:
        raise ShapeError(
            f"query/key/value grids disagree: {queries.shape} {keys.shape} {values.shape}"
        )
    tq, gh, gw, c = queries.shape
    tk = keys.shape[0]
    p = f"neck.{layer}"
    win = WindowConfig(cfg.win_t, cfg.win_h, cfg.win_w)
    kv_win = WindowConfig(tk, cfg.win_h, cfg.win_w)

    qn = nm.layer_norm(queries, params[f"{p}.ln1.g"], params[f"{p}.ln1.b"], cfg.ln_eps)
    q_tok, _ = window_partition(qn, win)
    k_tok, k_valid = window_partition(keys, kv_win)
    v_tok, _ = window_partition(values, kv_win)

    qp = _split_heads(nm.matmul(q_tok, params[f"{p}.wq"]), cfg.heads)
    kp = _split_heads(nm.matmul(k_tok, params[f"{p}.wk"]), cfg.heads)
    vp = _split_heads(nm.matmul(v_tok, params[f"{p}.wv"]), cfg.heads)

    # align each query window with the key window at its spatial position
    nt_q, nh, nw = window_grid((tq, gh, gw), win)
    n_spatial = nh * nw
    spatial_of = np.arange(nt_q * n_spatial) % n_spatial
    kp = nm.gather(kp, spatial_of, axis=0)
    vp = nm.gather(vp, spatial_of, axis=0)
    k_valid = k_valid[spatial_of]

    scale = 1.0 / math.sqrt(cfg.head_dim)
    logits = nm.mul(nm.matmul(qp, nm.transpose(kp, (0, 1, 3, 2))), scale)

    n_win, _, n_qtok, n_ktok = logits.shape
    mask = np.where(k_valid[:, None, None, :], 0.0, MASK_VALUE)
    mask = np.broadcast_to(mask, logits.shape).copy()
    if bias_table is not None:
        pieces = []
        for tw in range(nt_q):
            frames = query_frames[tw * cfg.win_t : (tw + 1) * cfg.win_t]
            bias, causal = bias_table.logit_bias(frames, key_frames)
            pieces.append((bias, causal))
        # expand per-temporal-window bias across spatial windows
        bias_stack = nm.concat(
            [nm.reshape(b, (1, cfg.heads, n_qtok, n_ktok)) for b, _ in pieces], axis=0
        )
        bias_all = nm.gather(bias_stack, np.arange(n_win) // n_spatial, axis=0)
        logits = nm.add(logits, bias_all)
        causal_all = np.stack([cmask for _, cmask in pieces], axis=0)
        mask = mask + causal_all[np.arange(n_win) // n_spatial][:, None, :, :]
    attn = nm.softmax(nm.add(logits, nm.tensor(mask)), axis=-1)

    out = _merge_heads(nm.matmul(attn, vp))
    out = nm.matmul(out, params[f"{p}.wo"])
    out = window_reverse(out, win, (tq, gh, gw))
    queries = nm.add(queries, out)

    qn2 = nm.layer_norm(queries, params[f"{p}.ln2.g"], params[f"{p}.ln2.b"], cfg.ln_eps)
    queries = nm.add(queries, _mlp(f"{p}.mlp", params, qn2))
    return queries
