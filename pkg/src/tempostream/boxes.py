"""Axis-aligned bounding boxes and per-frame detection sets."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import GeometryError

__all__ = ["BBox", "DetectionSet"]


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in continuous pixel coordinates.

    ``score`` is ``None`` for ground-truth boxes and a confidence in
    [0, 1] for predictions.
    """

    x_min: float
    y_min: float
    x_max: float
    y_max: float
    class_id: int = 0
    score: float | None = None

    def __post_init__(self) -> None:
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise GeometryError(
                f"degenerate box: ({self.x_min}, {self.y_min}, {self.x_max}, {self.y_max})"
            )
        if self.score is not None and not (0.0 <= self.score <= 1.0):
            raise GeometryError(f"score {self.score} outside [0, 1]")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    def as_list(self) -> list[float]:
        return [self.x_min, self.y_min, self.x_max, self.y_max]


@dataclass
class DetectionSet:
    """Boxes associated with one frame index.

    For predictions, ``frame_index`` is the frame the boxes are *for*
    (the forecast target), not necessarily the frame they were computed
    from.
    """

    frame_index: int
    boxes: list[BBox] = field(default_factory=list)

    def sorted_by_score(self) -> "DetectionSet":
        """Score-descending copy; ties keep insertion order (stable)."""
        order = sorted(
            range(len(self.boxes)),
            key=lambda i: -(self.boxes[i].score if self.boxes[i].score is not None else 1.0),
        )
        return DetectionSet(self.frame_index, [self.boxes[i] for i in order])

    def __len__(self) -> int:
        return len(self.boxes)
