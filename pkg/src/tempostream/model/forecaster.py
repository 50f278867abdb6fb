"""Full multi-horizon forecasting detector.

Composition: patch backbone -> temporal cross-attention neck (queries
are the current features replicated once per requested horizon; keys
are the chronologically ordered past+current features; values are
feature differences) -> dense head per horizon.
"""

from __future__ import annotations

from ..boxes import DetectionSet
from ..errors import ContractError
from .. import numerics as nm
from ..numerics import Tensor
from ..temporal import FeatureMap, TemporalProposal
from .attention import cross_attention_layer
from .backbone import extract_features
from .config import ModelConfig
from .head import run_head
from .posbias import BiasTable, build_bias_table
from .windows import WindowConfig

__all__ = ["forward_feature_maps", "forward_detections"]


def _stack_grids(maps: list[FeatureMap]) -> Tensor:
    """[C,H,W] grids -> [T,H,W,C] volume."""
    rows = []
    for fm in maps:
        g = nm.transpose(fm.grid, (1, 2, 0))
        rows.append(nm.reshape(g, (1,) + g.shape))
    return nm.concat(rows, axis=0)


def forward_feature_maps(
    params: dict,
    cfg: ModelConfig,
    current_image: Tensor,
    past_features: list[FeatureMap],
    proposal: TemporalProposal,
) -> tuple[list[FeatureMap], FeatureMap]:
    """Predict one future feature grid per proposal.future entry.

    ``past_features`` must carry exactly ``proposal.past`` as source
    indices, sorted chronologically.
    """
    got = tuple(fm.source_index for fm in past_features)
    if got != proposal.past:
        raise ContractError(f"buffered features {got} do not match proposal past {proposal.past}")
    if len(proposal.future) > cfg.max_future:
        raise ContractError(f"|future|={len(proposal.future)} exceeds max_future={cfg.max_future}")
    if len(proposal.past) > cfg.max_past:
        raise ContractError(f"|past|={len(proposal.past)} exceeds max_past={cfg.max_past}")

    current = extract_features(params, cfg, current_image, source_index=0)

    if not cfg.use_attention:
        out = [FeatureMap(f, current.grid) for f in proposal.future]
        return out, current

    key_maps = list(past_features) + [current]
    key_frames = [fm.source_index for fm in key_maps]
    keys = _stack_grids(key_maps)

    cur_vol = _stack_grids([current] * len(key_maps))
    if cfg.value_mode == "current_minus_past":
        values = nm.sub(cur_vol, keys)
    else:
        values = nm.sub(keys, cur_vol)

    queries = _stack_grids([current] * len(proposal.future))
    query_frames = list(proposal.future)

    bias_table: BiasTable | None = None
    if cfg.use_position_bias:
        win = WindowConfig(cfg.win_t, cfg.win_h, cfg.win_w)
        bias_table = build_bias_table(params, proposal.span, win, cfg.heads)

    for layer in range(cfg.layers):
        queries = cross_attention_layer(
            params, layer, cfg, queries, keys, values,
            bias_table, query_frames, key_frames,
        )

    out = []
    for i, f in enumerate(proposal.future):
        g = nm.narrow(queries, 0, i, 1)
        g = nm.reshape(g, queries.shape[1:])
        out.append(FeatureMap(f, nm.transpose(g, (2, 0, 1))))
    return out, current


def forward_detections(
    params: dict,
    cfg: ModelConfig,
    current_image: Tensor,
    past_features: list[FeatureMap],
    proposal: TemporalProposal,
) -> tuple[list[DetectionSet], FeatureMap]:
    """Full pipeline to decoded boxes, one DetectionSet per horizon."""
    futures, current = forward_feature_maps(
        params, cfg, current_image, past_features, proposal
    )
    return [run_head(params, cfg, fm) for fm in futures], current
