"""Training-time temporal proposal sampling.

Varying the sampled past/future index sets during training is what
makes the model usable across temporal intervals at inference time.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ..temporal import TemporalProposal

__all__ = ["sample_mixed_horizons", "PAST_RANGE", "FUTURE_RANGE"]

PAST_RANGE = (-24, -1)
FUTURE_RANGE = (1, 16)


def sample_mixed_horizons(
    rng: np.random.Generator,
    max_past: int,
    max_future: int,
    fixed_future: tuple[int, ...] | None = None,
) -> TemporalProposal:
    """Uniformly sample up to ``max_past`` past and ``max_future`` future
    indices from the training ranges. ``fixed_future`` pins the future
    side (single-horizon baseline mode)."""
    if max_past < 1 or max_future < 1:
        raise ConfigError("max_past and max_future must be >= 1")
    n_past = int(rng.integers(1, max_past + 1))
    lo, hi = PAST_RANGE
    past = rng.choice(hi - lo + 1, size=n_past, replace=False) + lo
    if fixed_future is not None:
        future = np.asarray(fixed_future)
    else:
        n_future = int(rng.integers(1, max_future + 1))
        flo, fhi = FUTURE_RANGE
        future = rng.choice(fhi - flo + 1, size=n_future, replace=False) + flo
    return TemporalProposal(past=tuple(int(i) for i in past),
                            future=tuple(int(i) for i in future))
