"""Exact Euclidean distance transform of a binary region.

For every foreground pixel the transform yields the Euclidean distance,
center to center, to the nearest background pixel; background pixels map
to 0. Out-of-bounds cells count as background (a virtual zero ring), so
the field stays finite for regions touching the raster border. The ring
is added along each axis of extent > 1; a degenerate single-row or
single-column raster is treated as one-dimensional, i.e. only its two
ends border virtual background (a 1x1 raster keeps the full ring).

`edt_exact` runs the two-pass lower-envelope algorithm on squared
distances (O(N)); `edt_bruteforce` is the exhaustive O(N * |bg|) oracle
kept for tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import BinaryMask


@dataclass(frozen=True)
class DistanceField:
    """Non-negative float grid of distances in pixels; 0 exactly on background."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(np.asarray(self.values), dtype=np.float64)
        if v.ndim != 2 or v.size == 0:
            raise ValueError(f"DistanceField must be a non-empty 2-D grid, got {v.shape}")
        if not np.all(np.isfinite(v)) or v.min() < 0.0:
            raise ValueError("DistanceField values must be finite and non-negative")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


def _pad_widths(shape: tuple[int, int]) -> tuple[int, int]:
    """One-cell virtual background along non-degenerate axes (both for 1x1)."""
    h, w = shape
    pad_r = 1 if h > 1 else 0
    pad_c = 1 if w > 1 else 0
    if pad_r == 0 and pad_c == 0:
        pad_r = pad_c = 1
    return pad_r, pad_c


def _column_distance(fg: np.ndarray) -> np.ndarray:
    """Per-column 1-D distance (in rows) to the nearest background pixel.

    Columns without any background get a cap larger than any true distance.
    """
    h, w = fg.shape
    cap = float(h + w + 1)
    g = np.where(fg, cap, 0.0)
    for r in range(1, h):
        np.minimum(g[r], g[r - 1] + 1.0, out=g[r])
    for r in range(h - 2, -1, -1):
        np.minimum(g[r], g[r + 1] + 1.0, out=g[r])
    return g


def _row_envelope_sq(f: np.ndarray) -> np.ndarray:
    """1-D squared-distance transform along each row.

    out[r, x] = min_c ((x - c)^2 + f[r, c]) via the lower envelope of the
    parabolas rooted at (c, f[r, c]).
    """
    rows, n = f.shape
    out = np.empty_like(f)
    v = np.zeros(n, dtype=np.int64)
    z = np.empty(n + 1, dtype=np.float64)
    for r in range(rows):
        k = 0
        v[0] = 0
        z[0] = -np.inf
        z[1] = np.inf
        for q in range(1, n):
            s = (f[r, q] + q * q - (f[r, v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k])
            while s <= z[k]:
                k -= 1
                s = (f[r, q] + q * q - (f[r, v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k])
            k += 1
            v[k] = q
            z[k] = s
            z[k + 1] = np.inf
        k = 0
        for q in range(n):
            while z[k + 1] < q:
                k += 1
            d = q - v[k]
            out[r, q] = d * d + f[r, v[k]]
    return out


try:  # pragma: no cover - exercised implicitly wherever numba is installed
    from numba import njit

    _row_envelope_sq = njit(cache=True)(_row_envelope_sq)
except ImportError:  # pragma: no cover
    pass


def edt_exact(mask: BinaryMask) -> DistanceField:
    """Exact EDT by the two-pass lower-envelope method on squared distances."""
    pad_r, pad_c = _pad_widths(mask.bits.shape)
    fg = np.pad(mask.bits, ((pad_r, pad_r), (pad_c, pad_c)), constant_values=False)
    g = _column_distance(fg)
    d2 = _row_envelope_sq(np.ascontiguousarray(g * g))
    h, w = mask.bits.shape
    core = d2[pad_r : pad_r + h, pad_c : pad_c + w]
    return DistanceField(np.sqrt(core))


def edt_bruteforce(mask: BinaryMask) -> DistanceField:
    """Exhaustive minimization over every background pixel (test oracle).

    Evaluates the full foreground x background squared-distance matrix and
    takes the row-wise minimum; no sweep or envelope is involved.
    """
    from scipy.spatial.distance import cdist

    pad_r, pad_c = _pad_widths(mask.bits.shape)
    fg = np.pad(mask.bits, ((pad_r, pad_r), (pad_c, pad_c)), constant_values=False)
    out = np.zeros(fg.shape, dtype=np.float64)
    fg_pts = np.argwhere(fg).astype(np.float64)
    bg_pts = np.argwhere(~fg).astype(np.float64)
    if fg_pts.size:
        d2 = cdist(fg_pts, bg_pts, "sqeuclidean").min(axis=1)
        out[fg] = np.sqrt(d2)
    h, w = mask.bits.shape
    return DistanceField(out[pad_r : pad_r + h, pad_c : pad_c + w])
