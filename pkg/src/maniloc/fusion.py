"""Geometric-mean aggregation of multi-view activation maps."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .raster import Heatmap, RasterError


@dataclass(frozen=True)
class FusionConfig:
    """Parameters of the geometric-mean fusion.

    epsilon is the per-pixel value floor applied before the product: a
    literal zero in any input view would otherwise annihilate the pixel
    permanently, and the downstream Bayes update needs a strictly positive
    prior.
    """

    epsilon: float = 1e-6
    scales: tuple[int, ...] = (2, 3, 4)

    def __post_init__(self) -> None:
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if len(self.scales) == 0:
            raise ValueError("at least one scale id is required")


def fuse_geometric(maps: Sequence[Heatmap], cfg: FusionConfig | None = None) -> Heatmap:
    """Per-pixel geometric mean of the input maps, clamped to [epsilon, 1].

    output(p) = (prod_i clamp(A_i(p), eps, 1)) ** (1/n),  n = len(maps)

    Computed as the mean of logs (sorted per pixel so the result is
    bit-identical under any permutation of the inputs), then exponentiated.
    """
    cfg = cfg or FusionConfig()
    if len(maps) == 0:
        raise ValueError("fuse_geometric requires at least one map")
    w, h = maps[0].width, maps[0].height
    for m in maps[1:]:
        if m.width != w or m.height != h:
            raise RasterError(
                f"fused maps must share dimensions: {w}x{h} vs {m.width}x{m.height}"
            )
    eps = float(cfg.epsilon)
    stack = np.stack([m.values for m in maps]).astype(np.float64)
    clamped = np.clip(stack, eps, 1.0)
    if len(maps) == 1:
        return Heatmap(clamped[0].astype(np.float32))

    logs = np.sort(np.log(clamped), axis=0)
    mean_log = np.clip(logs.mean(axis=0), logs[0], logs[-1])
    fused = np.clip(np.exp(mean_log), eps, 1.0)
    return Heatmap(fused.astype(np.float32))


def fuse_arithmetic(maps: Sequence[Heatmap]) -> Heatmap:
    """Arithmetic-mean baseline (CLI diagnostic only)."""
    if len(maps) == 0:
        raise ValueError("fuse_arithmetic requires at least one map")
    stack = np.stack([m.values for m in maps]).astype(np.float64)
    return Heatmap(np.clip(stack.mean(axis=0), 0.0, 1.0).astype(np.float32))


def fuse_max(maps: Sequence[Heatmap]) -> Heatmap:
    """Pixel-wise maximum baseline (CLI diagnostic only)."""
    if len(maps) == 0:
        raise ValueError("fuse_max requires at least one map")
    stack = np.stack([m.values for m in maps])
    return Heatmap(stack.max(axis=0))
