"""Delay-adaptive scheduling: EMA delay estimation, temporal-proposal
planning with clipping, historical feature buffer, output dispatch buffer.
"""

from __future__ import annotations

import math
from collections import OrderedDict, deque
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .boxes import DetectionSet
from .errors import ConfigError, ContractError
from .temporal import FeatureMap, TemporalProposal

__all__ = [
    "ComponentDelays",
    "DelayEstimate",
    "PlannerConfig",
    "Planner",
    "FeatureBuffer",
    "OutputBuffer",
    "BufferedPrediction",
    "ema_update",
    "plan",
]

EMA_DECAY = 0.5

Seconds = float | int | Fraction


def _frac(x: Seconds) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class ComponentDelays:
    """Per-invocation delays of the pipeline stages, in seconds."""

    backbone: Seconds = 0.0
    neck: Seconds = 0.0
    head: Seconds = 0.0
    other: Seconds = 0.0

    def __post_init__(self) -> None:
        if min(self.backbone, self.neck, self.head, self.other) < 0:
            raise ContractError(f"negative delay component: {self}")

    @property
    def total(self) -> Seconds:
        return self.backbone + self.neck + self.head + self.other

    def scaled(self, factor: float) -> "ComponentDelays":
        return ComponentDelays(
            self.backbone * factor, self.neck * factor,
            self.head * factor, self.other * factor,
        )


@dataclass(frozen=True)
class DelayEstimate:
    """EMA-smoothed component estimates plus the measured start-up delay."""

    backbone: Seconds = 0.0
    neck: Seconds = 0.0
    head: Seconds = 0.0
    other: Seconds = 0.0
    startup: Seconds = 0.0

    @property
    def total(self) -> Seconds:
        return self.backbone + self.neck + self.head + self.other


def ema_update(previous: DelayEstimate | None, observed: ComponentDelays) -> DelayEstimate:
    """decay*previous + (1-decay)*observed per component; the first
    observation is adopted directly."""
    if previous is None:
        return DelayEstimate(observed.backbone, observed.neck, observed.head, observed.other)
    d = EMA_DECAY
    return DelayEstimate(
        backbone=d * previous.backbone + (1 - d) * observed.backbone,
        neck=d * previous.neck + (1 - d) * observed.neck,
        head=d * previous.head + (1 - d) * observed.head,
        other=d * previous.other + (1 - d) * observed.other,
        startup=previous.startup,
    )


@dataclass(frozen=True)
class PlannerConfig:
    max_past: int = 4
    max_future: int = 4
    clip_min: int = -29
    clip_max: int = 19
    frame_rate: Seconds = 30
    peak_window: int = 4  # recent loops considered for the slow-mode horizon

    def __post_init__(self) -> None:
        if not (self.clip_min < 0 < self.clip_max):
            raise ConfigError(f"clip range [{self.clip_min}, {self.clip_max}] must straddle 0")
        if self.max_past < 1 or self.max_future < 1:
            raise ConfigError("max_past and max_future must be >= 1")
        if self.frame_rate <= 0:
            raise ConfigError("frame rate must be positive")
        if self.peak_window < 1:
            raise ConfigError("peak_window must be >= 1")


def _ceil_frames(seconds: Seconds, k: Seconds) -> int:
    return math.ceil(_frac(seconds) * _frac(k))


def _round_half_up(x: Fraction) -> int:
    return math.floor(x + Fraction(1, 2))


def plan(
    buffer_indices: list[int],
    estimate: DelayEstimate | None,
    now_frame: int,
    cfg: PlannerConfig,
    recent_totals: tuple[Seconds, ...] = (),
) -> TemporalProposal:
    """Pick past features and evenly spaced future targets, then clip.

    The first future target is the frame the current inference will
    finish at (ceil of estimated total + measured start-up). The last
    anchor extends to the worst recent total delay so the proposal
    hedges against the slow mode of a fluctuating-delay regime; the
    ``max_future`` targets are spread evenly (stride >= 1) between them.
    An empty buffer yields the synthetic cold-start past {-1}.
    """
    if any(i >= now_frame for i in buffer_indices):
        raise ContractError("buffered frame index at or after the current frame")
    est = estimate or DelayEstimate()
    k = cfg.frame_rate

    if buffer_indices:
        latest = sorted(buffer_indices)[-cfg.max_past:]
        past = sorted({max(cfg.clip_min, i - now_frame) for i in latest})
    else:
        past = [-1]

    f_first = max(1, _ceil_frames(_frac(est.total) + _frac(est.startup), k))
    peak = max((_frac(t) for t in recent_totals), default=_frac(est.total))
    f_last = max(f_first, _ceil_frames(peak + _frac(est.startup), k))
    if cfg.max_future > 1:
        stride = max(1, _round_half_up(Fraction(f_last - f_first, cfg.max_future - 1)))
    else:
        stride = 1
    future = sorted({
        min(cfg.clip_max, f_first + m * stride) for m in range(cfg.max_future)
    })
    return TemporalProposal(past=tuple(past), future=tuple(future))


class Planner:
    """Stateful wrapper: EMA estimate + recent-peak tracking + planning."""

    def __init__(self, cfg: PlannerConfig):
        self.cfg = cfg
        self.estimate: DelayEstimate | None = None
        self.recent_totals: deque = deque(maxlen=cfg.peak_window)

    def observe(self, delays: ComponentDelays) -> DelayEstimate:
        self.estimate = ema_update(self.estimate, delays)
        self.recent_totals.append(delays.total)
        return self.estimate

    def propose(
        self, buffer_indices: list[int], now_frame: int, startup: Seconds
    ) -> tuple[TemporalProposal, bool]:
        est = replace(self.estimate, startup=startup) if self.estimate else DelayEstimate(startup=startup)
        proposal = plan(
            buffer_indices, est, now_frame, self.cfg,
            recent_totals=tuple(self.recent_totals),
        )
        return proposal, not buffer_indices


class FeatureBuffer:
    """Insertion-ordered cache of computed features, strictly increasing
    frame indices, earliest evicted when full."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ConfigError("buffer capacity must be >= 1")
        self.capacity = capacity
        self._entries: OrderedDict[int, FeatureMap | None] = OrderedDict()

    def push(self, index: int, feature: FeatureMap | None) -> None:
        if self._entries and index <= next(reversed(self._entries)):
            raise ContractError(
                f"non-monotonic buffer push: {index} after {next(reversed(self._entries))}"
            )
        self._entries[index] = feature
        while len(self._entries) > self.capacity:
            self._entries.popitem(last=False)

    @property
    def indices(self) -> list[int]:
        return list(self._entries.keys())

    def get(self, index: int) -> FeatureMap | None:
        return self._entries.get(index)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, index: int) -> bool:
        return index in self._entries


@dataclass
class BufferedPrediction:
    """Output-buffer entry with provenance for audit."""

    target_frame: int
    detections: DetectionSet
    source_loop: int
    produced_at: Fraction
    warmup: bool = False


class OutputBuffer:
    """Holds multi-horizon predictions until their target time arrives.

    Dispatch returns the temporally closest entry (ties prefer the
    future side, guarding against underestimated delays); entries at or
    before the query frame are retired once returned.
    """

    def __init__(self) -> None:
        self._entries: dict[int, BufferedPrediction] = {}

    def push(self, predictions: list[BufferedPrediction]) -> None:
        targets = [p.target_frame for p in predictions]
        if len(set(targets)) != len(targets):
            raise ContractError(f"duplicate targets in one push: {targets}")
        for p in predictions:
            self._entries[p.target_frame] = p

    def dispatch(self, query_frame: int) -> BufferedPrediction | None:
        if not self._entries:
            return None
        best = min(self._entries, key=lambda t: (abs(t - query_frame), -t))
        entry = self._entries[best]
        if best <= query_frame:
            del self._entries[best]
        return entry

    @property
    def targets(self) -> list[int]:
        return sorted(self._entries.keys())

    def __len__(self) -> int:
        return len(self._entries)
