"""Detection-metric kernel: IoU, greedy matching, AP, COCO-style aggregation.

Pure functions over immutable inputs; shared by the streaming and the
offline evaluators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boxes import BBox, DetectionSet
from .errors import ConfigError, GeometryError

__all__ = [
    "COCO_THRESHOLDS",
    "SMALL_AREA",
    "LARGE_AREA",
    "APReport",
    "FrameMatches",
    "iou",
    "match_greedy",
    "average_precision",
    "aggregate_coco",
    "match_frames",
    "evaluate_frame_pairs",
]

COCO_THRESHOLDS = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))

# gt-area bucket boundaries (pixels^2)
SMALL_AREA = 32.0**2
LARGE_AREA = 96.0**2

RECALL_GRID = np.linspace(0.0, 1.0, 101)


def iou(a: BBox, b: BBox) -> float:
    """Intersection area over union area; 0 when disjoint."""
    if a.area <= 0.0 or b.area <= 0.0:
        raise GeometryError("zero-area box in iou")
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if ix <= 0.0 or iy <= 0.0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


@dataclass
class FrameMatches:
    """Match outcome for one (prediction set, gt set) pair at one IoU threshold.

    ``assignments`` lists, in score order, each prediction index and the
    gt index it matched (or None for a false positive).
    """

    assignments: list[tuple[int, int | None]]
    unmatched_gts: list[int]
    pred_scores: list[float]
    num_gts: int


def match_greedy(
    preds: DetectionSet, gts: DetectionSet, iou_threshold: float
) -> FrameMatches:
    """Greedy score-ordered matching, same-class only.

    Each prediction takes the highest-IoU still-unmatched gt of its class
    with IoU >= threshold. Score ties keep insertion order.
    """
    ordered = preds.sorted_by_score()
    taken = [False] * len(gts.boxes)
    assignments: list[tuple[int, int | None]] = []
    scores: list[float] = []
    for pi, p in enumerate(ordered.boxes):
        best_j, best_v = None, 0.0
        for j, g in enumerate(gts.boxes):
            if taken[j] or g.class_id != p.class_id:
                continue
            v = iou(p, g)
            if v < iou_threshold:
                continue
            if best_j is None or v > best_v:
                best_j, best_v = j, v
        if best_j is not None:
            taken[best_j] = True
        assignments.append((pi, best_j))
        scores.append(p.score if p.score is not None else 1.0)
    unmatched = [j for j, t in enumerate(taken) if not t]
    return FrameMatches(assignments, unmatched, scores, len(gts.boxes))


def average_precision(match_results: list[FrameMatches]) -> float:
    """101-point interpolated AP over a pool of per-frame match results.

    All results must come from the same IoU threshold. Zero ground
    truths across the pool yields 0.
    """
    num_gts = sum(m.num_gts for m in match_results)
    scores: list[float] = []
    flags: list[bool] = []
    for m in match_results:
        for (pi, gj), s in zip(m.assignments, m.pred_scores):
            scores.append(s)
            flags.append(gj is not None)
    if num_gts == 0:
        return 0.0
    if not scores:
        return 0.0
    order = np.argsort(-np.asarray(scores), kind="stable")
    tp = np.asarray(flags, dtype=np.float64)[order]
    fp = 1.0 - tp
    acc_tp = np.cumsum(tp)
    acc_fp = np.cumsum(fp)
    recall = acc_tp / num_gts
    precision = acc_tp / (acc_tp + acc_fp)
    # precision envelope (max precision at recall >= r), then sample the grid
    env = np.maximum.accumulate(precision[::-1])[::-1]
    idx = np.searchsorted(recall, RECALL_GRID, side="left")
    sampled = np.where(idx < len(env), env[np.minimum(idx, len(env) - 1)], 0.0)
    return float(np.mean(sampled))


@dataclass
class APReport:
    """COCO-style AP summary."""

    ap_per_iou: dict[float, float]
    ap_mean: float
    ap_small: float
    ap_medium: float
    ap_large: float
    num_gts: int = 0
    num_gts_by_size: dict[str, int] = field(default_factory=dict)
    zero_gt: bool = False

    def to_record(self) -> dict:
        rec = {
            "ap": self.ap_mean,
            "ap50": self.ap_per_iou.get(0.5, 0.0),
            "ap75": self.ap_per_iou.get(0.75, 0.0),
            "ap_small": self.ap_small,
            "ap_medium": self.ap_medium,
            "ap_large": self.ap_large,
            "num_gts": self.num_gts,
            "zero_gt": self.zero_gt,
        }
        rec["ap_per_iou"] = {f"{t:.2f}": v for t, v in sorted(self.ap_per_iou.items())}
        return rec


def aggregate_coco(
    ap_per_iou: dict[float, float],
    size_aps: dict[str, float],
    num_gts: int = 0,
    num_gts_by_size: dict[str, int] | None = None,
) -> APReport:
    """Combine per-threshold APs and size-bucket APs into one report."""
    missing = [t for t in COCO_THRESHOLDS if t not in ap_per_iou]
    if missing:
        raise ConfigError(f"missing IoU thresholds: {missing}")
    extra = [t for t in ap_per_iou if round(t, 2) not in COCO_THRESHOLDS]
    if extra:
        raise ConfigError(f"unexpected IoU thresholds: {extra}")
    ap_mean = float(np.mean([ap_per_iou[t] for t in COCO_THRESHOLDS]))
    return APReport(
        ap_per_iou=dict(ap_per_iou),
        ap_mean=ap_mean,
        ap_small=size_aps.get("small", 0.0),
        ap_medium=size_aps.get("medium", 0.0),
        ap_large=size_aps.get("large", 0.0),
        num_gts=num_gts,
        num_gts_by_size=dict(num_gts_by_size or {}),
        zero_gt=(num_gts == 0),
    )


def _size_bucket(area: float) -> str:
    if area < SMALL_AREA:
        return "small"
    if area < LARGE_AREA:
        return "medium"
    return "large"


def _filter_bucket(ds: DetectionSet, bucket: str) -> DetectionSet:
    return DetectionSet(
        ds.frame_index, [b for b in ds.boxes if _size_bucket(b.area) == bucket]
    )


def _split_class(ds: DetectionSet, class_id: int) -> DetectionSet:
    return DetectionSet(ds.frame_index, [b for b in ds.boxes if b.class_id == class_id])


def match_frames(
    pairs: list[tuple[DetectionSet, DetectionSet]], iou_threshold: float, class_id: int
) -> list[FrameMatches]:
    """Per-pair greedy matching restricted to one class."""
    return [
        match_greedy(_split_class(p, class_id), _split_class(g, class_id), iou_threshold)
        for p, g in pairs
    ]


def _mean_ap_over_classes(
    pairs: list[tuple[DetectionSet, DetectionSet]], iou_threshold: float
) -> float:
    """Class-mean AP at one threshold; classes without gt are excluded."""
    gt_classes = sorted({b.class_id for _, g in pairs for b in g.boxes})
    if not gt_classes:
        return 0.0
    aps = [
        average_precision(match_frames(pairs, iou_threshold, c)) for c in gt_classes
    ]
    return float(np.mean(aps))


def evaluate_frame_pairs(
    pairs: list[tuple[DetectionSet, DetectionSet]],
    thresholds: tuple[float, ...] = COCO_THRESHOLDS,
) -> APReport:
    """Full COCO-style evaluation of (prediction, gt) frame pairs.

    Size buckets restrict both gts and predictions to the bucket's area
    range before matching (desk-scale simplification of the COCO ignore
    mechanism).
    """
    ap_per_iou = {t: _mean_ap_over_classes(pairs, t) for t in thresholds}
    size_aps: dict[str, float] = {}
    gt_counts: dict[str, int] = {}
    for bucket in ("small", "medium", "large"):
        bucket_pairs = [
            (_filter_bucket(p, bucket), _filter_bucket(g, bucket)) for p, g in pairs
        ]
        gt_counts[bucket] = sum(len(g.boxes) for _, g in bucket_pairs)
        if gt_counts[bucket] == 0:
            size_aps[bucket] = 0.0
        else:
            size_aps[bucket] = float(
                np.mean([_mean_ap_over_classes(bucket_pairs, t) for t in thresholds])
            )
    num_gts = sum(len(g.boxes) for _, g in pairs)
    return aggregate_coco(ap_per_iou, size_aps, num_gts, gt_counts)
