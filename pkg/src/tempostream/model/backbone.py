"""Patchify backbone: non-overlapping patches + affine projection."""

from __future__ import annotations

from ..errors import ShapeError
from .. import numerics as nm
from ..numerics import Tensor
from ..temporal import FeatureMap
from .config import ModelConfig

__all__ = ["extract_features"]


def extract_features(params: dict, cfg: ModelConfig, image: Tensor,
                     source_index: int = 0) -> FeatureMap:
    """[3, H, W] image -> FeatureMap with grid [C, H/patch, W/patch]."""
    if image.ndim != 3 or image.shape[0] != 3:
        raise ShapeError(f"expected [3,H,W] image, got {image.shape}")
    _, h, w = image.shape
    p = cfg.patch
    if h % p or w % p:
        raise ShapeError(f"image {h}x{w} not divisible by patch stride {p}")
    gh, gw = h // p, w // p
    x = nm.reshape(image, (3, gh, p, gw, p))
    x = nm.transpose(x, (1, 3, 0, 2, 4))
    x = nm.reshape(x, (gh * gw, 3 * p * p))
    x = nm.add(nm.matmul(x, params["backbone.w"]), params["backbone.b"])
    x = nm.reshape(x, (gh, gw, cfg.channels))
    grid = nm.transpose(x, (2, 0, 1))
    return FeatureMap(source_index=source_index, grid=grid)
