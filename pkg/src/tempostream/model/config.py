"""Model hyperparameters."""

from __future__ import annotations

from dataclasses import dataclass, asdict

from ..errors import ConfigError

__all__ = ["ModelConfig"]

VALUE_MODES = ("current_minus_past", "past_minus_current")


@dataclass(frozen=True)
class ModelConfig:
    """Toy multi-horizon detector configuration.

    ``use_position_bias`` and ``use_attention`` are the ablation toggles
    for the temporal position bias and the cross-attention neck; with
    the neck off, every horizon falls back to the current-frame features.
    """

    channels: int = 32
    layers: int = 2
    heads: int = 4
    win_t: int = 4
    win_h: int = 3
    win_w: int = 3
    patch: int = 8
    mlp_ratio: int = 2
    bias_hidden: int = 16
    num_classes: int = 1
    max_past: int = 4
    max_future: int = 4
    use_position_bias: bool = True
    use_attention: bool = True
    value_mode: str = "current_minus_past"
    score_threshold: float = 0.3
    nms_iou: float = 0.65
    ln_eps: float = 1e-5

    def __post_init__(self) -> None:
        if self.channels % self.heads != 0:
            raise ConfigError(f"channels {self.channels} not divisible by heads {self.heads}")
        if min(self.win_t, self.win_h, self.win_w) < 1:
            raise ConfigError("window extents must be >= 1")
        if self.max_past < 1 or self.max_future < 1:
            raise ConfigError("max_past and max_future must be >= 1")
        if self.value_mode not in VALUE_MODES:
            raise ConfigError(f"value_mode must be one of {VALUE_MODES}")
        if self.patch < 1:
            raise ConfigError("patch stride must be >= 1")

    @property
    def head_dim(self) -> int:
        return self.channels // self.heads

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown model config keys: {sorted(unknown)}")
        return cls(**d)
