"""Synthetic moving-rectangle scenarios with exact ground truth.

Objects are axis-aligned rectangles with per-class solid colors moving
under piecewise-constant velocity; velocity changes model acceleration
episodes. Positions are continuous; rendering rasterizes to the pixel
grid; ground truth keeps the continuous geometry, clipped at borders.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from fractions import Fraction

import numpy as np

from ..boxes import BBox, DetectionSet
from ..errors import ConfigError
from ..model.training import TrainSample
from ..temporal import TemporalProposal

__all__ = [
    "MotionSegment", "ObjectSpec", "ScenarioSpec", "Scenario",
    "generate_scenario", "training_sample",
]

PALETTE = (
    (0.90, 0.20, 0.10),
    (0.15, 0.80, 0.20),
    (0.20, 0.30, 0.95),
    (0.90, 0.85, 0.10),
    (0.85, 0.15, 0.80),
    (0.10, 0.85, 0.85),
)

MIN_VISIBLE = 1.0  # px of clipped extent required to keep a gt box


@dataclass(frozen=True)
class MotionSegment:
    """Constant velocity (px/frame) from ``start_frame`` onward."""

    start_frame: int
    vx: float
    vy: float


@dataclass(frozen=True)
class ObjectSpec:
    class_id: int
    width: float
    height: float
    cx: float  # center at spawn_frame
    cy: float
    segments: tuple[MotionSegment, ...] = (MotionSegment(0, 0.0, 0.0),)
    spawn_frame: int = 0
    despawn_frame: int | None = None  # exclusive

    def center_at(self, frame: int) -> tuple[float, float]:
        """Piecewise-linear center position at an absolute frame index."""
        x, y = self.cx, self.cy
        segs = sorted(self.segments, key=lambda s: s.start_frame)
        rel = frame - self.spawn_frame
        for i, seg in enumerate(segs):
            seg_start = max(0, seg.start_frame)
            seg_end = segs[i + 1].start_frame if i + 1 < len(segs) else rel
            span = min(rel, seg_end) - seg_start
            if span > 0:
                x += seg.vx * span
                y += seg.vy * span
        return x, y

    def active(self, frame: int) -> bool:
        if frame < self.spawn_frame:
            return False
        return self.despawn_frame is None or frame < self.despawn_frame


@dataclass(frozen=True)
class ScenarioSpec:
    image_size: int = 96
    length: int = 60
    frame_rate: int = 30
    num_classes: int = 1
    objects: tuple[ObjectSpec, ...] | None = None
    # random-generation knobs, used when `objects` is None
    num_objects: int = 2
    size_range: tuple[float, float] = (12.0, 20.0)
    speed_range: tuple[float, float] = (0.5, 2.0)
    accel_episodes: int = 0
    accel_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.length < 1 or self.image_size < 8:
            raise ConfigError("scenario length/image_size too small")
        if self.frame_rate <= 0:
            raise ConfigError("frame rate must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Scenario:
    spec: ScenarioSpec
    objects: tuple[ObjectSpec, ...]
    frames: np.ndarray  # [L, 3, S, S] float32
    ground_truth: list[DetectionSet]
    seed: int = 0

    @property
    def length(self) -> int:
        return self.spec.length

    @property
    def frame_rate(self) -> Fraction:
        return Fraction(self.spec.frame_rate)

    def frame_time(self, index: int) -> Fraction:
        return Fraction(index, 1) / self.frame_rate


def _gt_box(obj: ObjectSpec, frame: int, size: int) -> BBox | None:
    if not obj.active(frame):
        return None
    cx, cy = obj.center_at(frame)
    x0, y0 = cx - obj.width / 2.0, cy - obj.height / 2.0
    x1, y1 = cx + obj.width / 2.0, cy + obj.height / 2.0
    x0c, y0c = max(0.0, x0), max(0.0, y0)
    x1c, y1c = min(float(size), x1), min(float(size), y1)
    if x1c - x0c < MIN_VISIBLE or y1c - y0c < MIN_VISIBLE:
        return None
    return BBox(x0c, y0c, x1c, y1c, class_id=obj.class_id)


def _render(objects: tuple[ObjectSpec, ...], frame: int, size: int) -> np.ndarray:
    img = np.zeros((3, size, size), dtype=np.float32)
    for obj in objects:
        box = _gt_box(obj, frame, size)
        if box is None:
            continue
        x0 = int(np.clip(round(box.x_min), 0, size))
        x1 = int(np.clip(round(box.x_max), 0, size))
        y0 = int(np.clip(round(box.y_min), 0, size))
        y1 = int(np.clip(round(box.y_max), 0, size))
        color = PALETTE[obj.class_id % len(PALETTE)]
        for c in range(3):
            img[c, y0:y1, x0:x1] = color[c]
    return img


def _random_objects(spec: ScenarioSpec, rng: np.random.Generator) -> tuple[ObjectSpec, ...]:
    objs = []
    for n in range(spec.num_objects):
        w = float(rng.uniform(*spec.size_range))
        h = float(rng.uniform(*spec.size_range))
        if w >= spec.image_size or h >= spec.image_size:
            raise ConfigError("object larger than image")
        margin_x = w / 2.0 + 1.0
        margin_y = h / 2.0 + 1.0
        cx = float(rng.uniform(margin_x, spec.image_size - margin_x))
        cy = float(rng.uniform(margin_y, spec.image_size - margin_y))
        segments = []
        n_seg = 1 + spec.accel_episodes
        starts = [0] + sorted(
            int(v) for v in rng.integers(1, max(2, spec.length - 1), size=n_seg - 1)
        )
        for s in starts:
            speed = float(rng.uniform(*spec.speed_range))
            if len(segments) > 0:
                speed *= spec.accel_scale
            angle = float(rng.uniform(0, 2 * np.pi))
            segments.append(MotionSegment(s, speed * np.cos(angle), speed * np.sin(angle)))
        objs.append(
            ObjectSpec(
                class_id=n % spec.num_classes,
                width=w, height=h, cx=cx, cy=cy,
                segments=tuple(segments),
            )
        )
    return tuple(objs)


def generate_scenario(spec: ScenarioSpec, seed: int = 0) -> Scenario:
    """Deterministic scenario from a spec and a seed."""
    for obj in spec.objects or ():
        if obj.width >= spec.image_size or obj.height >= spec.image_size:
            raise ConfigError("object larger than image")
    rng = np.random.default_rng(seed)
    objects = spec.objects if spec.objects is not None else _random_objects(spec, rng)
    frames = np.stack(
        [_render(objects, f, spec.image_size) for f in range(spec.length)]
    )
    gts = []
    for f in range(spec.length):
        boxes = [b for b in (_gt_box(o, f, spec.image_size) for o in objects) if b]
        gts.append(DetectionSet(f, boxes))
    return Scenario(spec=spec, objects=objects, frames=frames, ground_truth=gts, seed=seed)


def training_sample(
    scenario: Scenario, anchor: int, proposal: TemporalProposal
) -> TrainSample:
    """Assemble one training example anchored at an absolute frame."""
    lo = anchor + min(proposal.past)
    hi = anchor + max(proposal.future)
    if lo < 0 or hi >= scenario.length:
        raise ConfigError(
            f"anchor {anchor} with proposal {proposal} outside scenario of length {scenario.length}"
        )
    return TrainSample(
        past_images=[scenario.frames[anchor + p] for p in proposal.past],
        current_image=scenario.frames[anchor],
        future_gts=[scenario.ground_truth[anchor + f] for f in proposal.future],
        proposal=proposal,
        sample_id=f"seed{scenario.seed}-a{anchor}",
    )
