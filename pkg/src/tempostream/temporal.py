"""Temporal proposals and per-frame feature grids."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ContractError
from .numerics import Tensor

__all__ = ["TemporalProposal", "FeatureMap"]


@dataclass(frozen=True)
class TemporalProposal:
    """Relative frame indices: available past features and forecast targets."""

    past: tuple[int, ...]
    future: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "past", tuple(sorted(self.past)))
        object.__setattr__(self, "future", tuple(sorted(self.future)))
        if not self.past or not self.future:
            raise ContractError("proposal needs non-empty past and future")
        if any(i >= 0 for i in self.past):
            raise ContractError(f"past indices must be negative: {self.past}")
        if any(i <= 0 for i in self.future):
            raise ContractError(f"future indices must be positive: {self.future}")
        if len(set(self.past)) != len(self.past) or len(set(self.future)) != len(self.future):
            raise ContractError("duplicate proposal indices")

    @property
    def span(self) -> int:
        """Maximum query-key temporal difference (latest future vs earliest past)."""
        return max(self.future) - min(self.past)


@dataclass
class FeatureMap:
    """Dense feature grid tagged with its source frame index.

    ``source_index`` is relative (0 current, negative past) in model
    contexts and absolute in buffer contexts; ``grid`` is channels-first
    [C, H', W'].
    """

    source_index: int
    grid: Tensor
