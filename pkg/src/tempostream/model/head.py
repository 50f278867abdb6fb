"""Dense per-cell detection head with NMS decoding.

Each feature cell predicts (objectness logit, tx, ty, tw, th, class
logits). Offsets are relative to the cell center in stride units; sizes
are log-encoded in stride units.
"""

from __future__ import annotations

import numpy as np

from ..boxes import BBox, DetectionSet
from .. import numerics as nm
from ..numerics import Tensor
from ..temporal import FeatureMap
from ..detmetrics import iou
from .config import ModelConfig

__all__ = ["head_maps", "decode_detections", "run_head", "nms"]


def head_maps(params: dict, cfg: ModelConfig, feature: FeatureMap) -> Tensor:
    """FeatureMap -> raw prediction maps [H', W', 5 + num_classes]."""
    grid = feature.grid  # [C, H', W']
    _, gh, gw = grid.shape
    x = nm.transpose(grid, (1, 2, 0))
    x = nm.reshape(x, (gh * gw, cfg.channels))
    x = nm.add(nm.matmul(x, params["head.w"]), params["head.b"])
    return nm.reshape(x, (gh, gw, 5 + cfg.num_classes))


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -500, 500)))


def nms(boxes: list[BBox], iou_threshold: float) -> list[BBox]:
    """Greedy class-wise suppression; boxes must be score-sorted descending."""
    kept: list[BBox] = []
    for b in boxes:
        if all(k.class_id != b.class_id or iou(k, b) <= iou_threshold for k in kept):
            kept.append(b)
    return kept


def decode_detections(maps: np.ndarray, cfg: ModelConfig, frame_index: int,
                      image_extent: tuple[float, float] | None = None) -> DetectionSet:
    """Raw maps -> thresholded, NMS-filtered DetectionSet."""
    gh, gw, _ = maps.shape
    stride = float(cfg.patch)
    obj = _sigmoid(maps[..., 0])
    candidates: list[BBox] = []
    ys, xs = np.nonzero(obj >= cfg.score_threshold)
    for iy, ix in zip(ys, xs):
        tx, ty, tw, th = maps[iy, ix, 1:5]
        cx = (ix + 0.5 + tx) * stride
        cy = (iy + 0.5 + ty) * stride
        bw = float(np.exp(np.clip(tw, -8, 8))) * stride
        bh = float(np.exp(np.clip(th, -8, 8))) * stride
        x0, y0 = cx - bw / 2.0, cy - bh / 2.0
        x1, y1 = cx + bw / 2.0, cy + bh / 2.0
        if image_extent is not None:
            x0, y0 = max(0.0, x0), max(0.0, y0)
            x1, y1 = min(image_extent[0], x1), min(image_extent[1], y1)
        if x1 - x0 <= 1e-6 or y1 - y0 <= 1e-6:
            continue
        cls = int(np.argmax(maps[iy, ix, 5:])) if cfg.num_classes > 1 else 0
        candidates.append(
            BBox(x0, y0, x1, y1, class_id=cls, score=float(obj[iy, ix]))
        )
    candidates.sort(key=lambda b: -b.score)
    return DetectionSet(frame_index, nms(candidates, cfg.nms_iou))


def run_head(params: dict, cfg: ModelConfig, feature: FeatureMap,
             frame_index: int | None = None) -> DetectionSet:
    """Head + decode in one step (inference path)."""
    maps = head_maps(params, cfg, feature)
    gh, gw = maps.shape[0], maps.shape[1]
    extent = (gw * float(cfg.patch), gh * float(cfg.patch))
    idx = feature.source_index if frame_index is None else frame_index
    return decode_detections(maps.data, cfg, idx, extent)
