"""Parameter initialization and deterministic checkpoint serialization.

Checkpoint layout: one JSON header line (sorted keys) holding the model
config and an array manifest, then the raw little-endian array bytes in
manifest order. Round-trips are bit-exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from ..numerics import Tensor, tensor
from .config import ModelConfig

__all__ = ["init_params", "save_checkpoint", "load_checkpoint", "param_names"]

CHECKPOINT_VERSION = 1


def _trunc_normal(rng: np.random.Generator, shape, std: float = 0.02) -> np.ndarray:
    x = rng.standard_normal(shape)
    return np.clip(x, -2.0, 2.0) * std


def init_params(cfg: ModelConfig, seed: int = 0) -> dict[str, Tensor]:
    """Truncated-normal projections, zero biases, unit norm gains.

    The position-bias projector's output layer starts at zero so early
    training equals plain attention.
    """
    rng = np.random.default_rng(seed)
    c = cfg.channels
    p = {}
    p["backbone.w"] = _trunc_normal(rng, (3 * cfg.patch * cfg.patch, c))
    p["backbone.b"] = np.zeros(c)
    for i in range(cfg.layers):
        for name in ("wq", "wk", "wv", "wo"):
            p[f"neck.{i}.{name}"] = _trunc_normal(rng, (c, c))
        p[f"neck.{i}.ln1.g"] = np.ones(c)
        p[f"neck.{i}.ln1.b"] = np.zeros(c)
        p[f"neck.{i}.ln2.g"] = np.ones(c)
        p[f"neck.{i}.ln2.b"] = np.zeros(c)
        hidden = cfg.mlp_ratio * c
        p[f"neck.{i}.mlp.w1"] = _trunc_normal(rng, (c, hidden))
        p[f"neck.{i}.mlp.b1"] = np.zeros(hidden)
        p[f"neck.{i}.mlp.w2"] = _trunc_normal(rng, (hidden, c))
        p[f"neck.{i}.mlp.b2"] = np.zeros(c)
    p["bias.w1"] = _trunc_normal(rng, (3, cfg.bias_hidden))
    p["bias.b1"] = np.zeros(cfg.bias_hidden)
    p["bias.w2"] = np.zeros((cfg.bias_hidden, cfg.heads))
    p["bias.b2"] = np.zeros(cfg.heads)
    p["head.w"] = _trunc_normal(rng, (c, 5 + cfg.num_classes))
    p["head.b"] = np.zeros(5 + cfg.num_classes)
    return {k: tensor(v, requires_grad=True) for k, v in p.items()}


def param_names(cfg: ModelConfig) -> list[str]:
    return sorted(init_params(cfg, seed=0).keys())


def save_checkpoint(path: str | Path, params: dict[str, Tensor], cfg: ModelConfig) -> None:
    names = sorted(params.keys())
    manifest = []
    blobs = []
    for name in names:
        arr = np.ascontiguousarray(params[name].data)
        raw = arr.astype("<f8", copy=False).tobytes()
        manifest.append({"name": name, "shape": list(arr.shape), "nbytes": len(raw)})
        blobs.append(raw)
    header = {
        "version": CHECKPOINT_VERSION,
        "config": cfg.to_dict(),
        "arrays": manifest,
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        for raw in blobs:
            fh.write(raw)


def load_checkpoint(path: str | Path) -> tuple[dict[str, Tensor], ModelConfig]:
    with open(path, "rb") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ConfigError(f"not a checkpoint file: {path}") from exc
        if header.get("version") != CHECKPOINT_VERSION:
            raise ConfigError(f"unsupported checkpoint version in {path}")
        cfg = ModelConfig.from_dict(header["config"])
        params: dict[str, Tensor] = {}
        for entry in header["arrays"]:
            raw = fh.read(entry["nbytes"])
            if len(raw) != entry["nbytes"]:
                raise ConfigError(f"truncated checkpoint: {path}")
            arr = np.frombuffer(raw, dtype="<f8").reshape(entry["shape"]).copy()
            params[entry["name"]] = tensor(arr, requires_grad=True)
    return params, cfg
