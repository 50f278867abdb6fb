"""Loss, target assignment, and plain-SGD training steps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..boxes import DetectionSet
from ..errors import NumericError
from .. import numerics as nm
from ..numerics import Tape, Tensor, backward, tensor
from ..temporal import TemporalProposal
from .config import ModelConfig
from .forecaster import forward_feature_maps
from .backbone import extract_features
from .head import head_maps

__all__ = ["TrainSample", "SGD", "build_targets", "detection_loss", "train_step"]


@dataclass
class TrainSample:
    """One training example: raw frames in, future ground truth out."""

    past_images: list[np.ndarray]  # chronological, matching proposal.past
    current_image: np.ndarray
    future_gts: list[DetectionSet]  # matching proposal.future
    proposal: TemporalProposal
    sample_id: str = ""


class SGD:
    """Plain gradient descent over a parameter dict."""

    def __init__(self, lr: float):
        self.lr = lr

    def step(self, params: dict[str, Tensor]) -> None:
        for p in params.values():
            if p.grad is not None:
                p.data = p.data - self.lr * p.grad
                p.grad = None


def build_targets(gts: DetectionSet, cfg: ModelConfig, gh: int, gw: int):
    """Center-cell assignment: (objectness [gh,gw], boxes [gh,gw,4], mask)."""
    stride = float(cfg.patch)
    obj = np.zeros((gh, gw))
    box = np.zeros((gh, gw, 4))
    mask = np.zeros((gh, gw))
    for b in gts.boxes:
        cx = (b.x_min + b.x_max) / 2.0
        cy = (b.y_min + b.y_max) / 2.0
        ix = int(cx / stride)
        iy = int(cy / stride)
        if not (0 <= ix < gw and 0 <= iy < gh):
            continue
        obj[iy, ix] = 1.0
        box[iy, ix] = [
            cx / stride - (ix + 0.5),
            cy / stride - (iy + 0.5),
            np.log(max(b.width, 1e-3) / stride),
            np.log(max(b.height, 1e-3) / stride),
        ]
        mask[iy, ix] = 1.0
    return obj, box, mask


def _bce_with_logits(logits: Tensor, target: np.ndarray) -> Tensor:
    """Stable elementwise binary cross-entropy, mean over all cells."""
    y = tensor(target)
    pos = nm.relu(logits)
    xy = nm.mul(logits, y)
    soft = nm.log(nm.add(nm.exp(nm.neg(nm.absolute(logits))), 1.0))
    return nm.reduce_mean(nm.add(nm.sub(pos, xy), soft))


def detection_loss(maps: Tensor, gts: DetectionSet, cfg: ModelConfig) -> Tensor:
    """Objectness BCE over all cells + L1 box loss on positive cells."""
    gh, gw = maps.shape[0], maps.shape[1]
    obj_t, box_t, mask = build_targets(gts, cfg, gh, gw)
    obj_logits = nm.reshape(nm.narrow(maps, 2, 0, 1), (gh, gw))
    loss = _bce_with_logits(obj_logits, obj_t)
    n_pos = float(mask.sum())
    if n_pos > 0:
        pred_box = nm.narrow(maps, 2, 1, 4)
        l1 = nm.absolute(nm.sub(pred_box, tensor(box_t)))
        cell_mask = np.broadcast_to(mask[..., None], l1.shape).copy()
        l1 = nm.mul(l1, tensor(cell_mask))
        loss = nm.add(loss, nm.mul(nm.reduce_sum(l1), 1.0 / (4.0 * n_pos)))
    return loss


def _sample_loss(params: dict, cfg: ModelConfig, sample: TrainSample) -> Tensor:
    past_feats = [
        extract_features(params, cfg, tensor(img), source_index=idx)
        for idx, img in zip(sample.proposal.past, sample.past_images)
    ]
    futures, _ = forward_feature_maps(
        params, cfg, tensor(sample.current_image), past_feats, sample.proposal
    )
    # equal weight per forecast horizon
    per_future = [
        detection_loss(head_maps(params, cfg, fm), gt, cfg)
        for fm, gt in zip(futures, sample.future_gts)
    ]
    total = per_future[0]
    for term in per_future[1:]:
        total = nm.add(total, term)
    return nm.mul(total, 1.0 / len(per_future))


def train_step(
    batch: list[TrainSample],
    params: dict[str, Tensor],
    cfg: ModelConfig,
    opt: SGD,
) -> float:
    """One SGD update on a batch; returns the batch loss."""
    with Tape() as tape:
        total = None
        for sample in batch:
            term = _sample_loss(params, cfg, sample)
            total = term if total is None else nm.add(total, term)
        loss = nm.mul(total, 1.0 / len(batch))
    value = loss.item()
    if not np.isfinite(value):
        ids = [s.sample_id for s in batch]
        raise NumericError(f"non-finite loss {value} on batch {ids}")
    backward(tape, loss)
    opt.step(params)
    return value
