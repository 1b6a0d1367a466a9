"""Grid types, raster file I/O, resampling and normalization.

Every other module works on the types defined here. All types are
immutable after construction and all operations are pure functions.

File formats:
  - heatmaps: 16-bit single-channel PNG (value = round(v * 65535)) or the
    raw "F32M" float32 format (bit-exact),
  - label maps: 16-bit single-channel PNG holding raw label ids,
  - binary masks: 8-bit single-channel PNG with values 0 / 255.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

F32M_MAGIC = b"F32M"

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


class RasterError(ValueError):
    """A raster file or array violates one of the type contracts."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def _check_2d(a: np.ndarray, what: str) -> None:
    if a.ndim != 2:
        raise RasterError(f"{what} must be a 2-D grid, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise RasterError(f"{what} must have width >= 1 and height >= 1")


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Heatmap:
    """Row-major float32 grid with every value finite and in [0, 1]."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float32)
        _check_2d(v, "Heatmap")
        if not np.all(np.isfinite(v)):
            raise RasterError("Heatmap contains non-finite values")
        if v.min() < 0.0 or v.max() > 1.0:
            raise RasterError("Heatmap values must lie in [0, 1]")
        object.__setattr__(self, "values", _freeze(v))

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class LabelMap:
    """Row-major grid of non-negative integer region ids (0 = background).

    Region ids need not be contiguous.
    """

    labels: np.ndarray

    def __post_init__(self) -> None:
        raw = np.asarray(self.labels)
        if not np.issubdtype(raw.dtype, np.integer):
            raise RasterError(f"LabelMap labels must be integers, got {raw.dtype}")
        lab = np.array(raw, dtype=np.int32)
        _check_2d(lab, "LabelMap")
        if lab.min() < 0:
            raise RasterError("LabelMap labels must be non-negative")
        object.__setattr__(self, "labels", _freeze(lab))

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    def distinct_labels(self) -> list[int]:
        """Distinct region ids >= 1, ascending."""
        u = np.unique(self.labels)
        return [int(x) for x in u if x >= 1]


@dataclass(frozen=True)
class BinaryMask:
    """Row-major boolean grid (single region or ground-truth mask)."""

    bits: np.ndarray

    def __post_init__(self) -> None:
        raw = np.asarray(self.bits)
        if raw.dtype != np.bool_:
            raise RasterError(f"BinaryMask bits must be boolean, got {raw.dtype}")
        b = np.array(raw)
        _check_2d(b, "BinaryMask")
        object.__setattr__(self, "bits", _freeze(b))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def area(self) -> int:
        return int(self.bits.sum())


@dataclass(frozen=True)
class GrayImage:
    """Single-channel 8- or 16-bit image."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values)
        if v.dtype not in (np.uint8, np.uint16):
            raise RasterError(f"GrayImage must be uint8 or uint16, got {v.dtype}")
        v = np.array(v)
        _check_2d(v, "GrayImage")
        object.__setattr__(self, "values", _freeze(v))

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class RgbImage:
    """Three-channel 8- or 16-bit image, shape (H, W, 3)."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values)
        if v.dtype not in (np.uint8, np.uint16):
            raise RasterError(f"RgbImage must be uint8 or uint16, got {v.dtype}")
        if v.ndim != 3 or v.shape[2] != 3:
            raise RasterError(f"RgbImage must have shape (H, W, 3), got {v.shape}")
        if v.shape[0] < 1 or v.shape[1] < 1:
            raise RasterError("RgbImage must have width >= 1 and height >= 1")
        v = np.array(v)
        object.__setattr__(self, "values", _freeze(v))

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


# ---------------------------------------------------------------------------
# PNG helpers
# ---------------------------------------------------------------------------


def _open_png_gray(path: Path | str, bits: int) -> np.ndarray:
    """Open a single-channel PNG and return the raw integer array."""
    path = Path(path)
    if not path.is_file():
        raise RasterError(f"no such file: {path}")
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            arr = np.asarray(im)
    except RasterError:
        raise
    except Exception as exc:
        raise RasterError(f"cannot decode {path}: {exc}") from exc
    if mode in ("RGB", "RGBA", "LA", "P", "CMYK", "YCbCr"):
        raise RasterError(f"{path}: expected single-channel PNG, got mode {mode!r}")
    if bits == 16:
        if mode not in ("I;16", "I;16B", "I"):
            raise RasterError(f"{path}: expected 16-bit grayscale PNG, got mode {mode!r}")
        arr = arr.astype(np.int64)
        if arr.min() < 0 or arr.max() > 65535:
            raise RasterError(f"{path}: sample values outside 16-bit range")
        return arr.astype(np.uint16)
    if bits == 8:
        if mode != "L":
            raise RasterError(f"{path}: expected 8-bit grayscale PNG, got mode {mode!r}")
        return arr.astype(np.uint8)
    raise ValueError(f"unsupported bit depth {bits}")


def _save_png_gray16(arr: np.ndarray, path: Path | str) -> None:
    Image.fromarray(np.ascontiguousarray(arr, dtype=np.uint16)).save(Path(path), format="PNG")


def _save_png_gray8(arr: np.ndarray, path: Path | str) -> None:
    Image.fromarray(np.ascontiguousarray(arr, dtype=np.uint8)).save(Path(path), format="PNG")


# ---------------------------------------------------------------------------
# Heatmap I/O
# ---------------------------------------------------------------------------


def load_heatmap(path: Path | str) -> Heatmap:
    """Load a heatmap from a 16-bit grayscale PNG or an F32M raw file.

    The format is sniffed from the file magic. PNG samples map v -> v/65535;
    raw float32 values pass through unchanged and must already satisfy the
    Heatmap invariants.
    """
    path = Path(path)
    if not path.is_file():
        raise RasterError(f"no such file: {path}")
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic == F32M_MAGIC:
        return Heatmap(_read_f32m(path))
    arr = _open_png_gray(path, bits=16)
    return Heatmap((arr.astype(np.float64) / 65535.0).astype(np.float32))


def save_heatmap(h: Heatmap, path: Path | str, format: str = "png16") -> None:
    """Write a heatmap as 16-bit PNG (quantized) or F32M raw (lossless)."""
    path = Path(path)
    if format == "png16":
        q = np.rint(h.values.astype(np.float64) * 65535.0).astype(np.uint16)
        _save_png_gray16(q, path)
    elif format == "f32raw":
        _write_f32m(h.values, path)
    else:
        raise ValueError(f"unknown heatmap format {format!r} (use 'png16' or 'f32raw')")


def _read_f32m(path: Path) -> np.ndarray:
    data = path.read_bytes()
    if len(data) < 12 or data[:4] != F32M_MAGIC:
        raise RasterError(f"{path}: not an F32M file")
    height, width = struct.unpack("<II", data[4:12])
    if height < 1 or width < 1:
        raise RasterError(f"{path}: degenerate F32M dimensions {height}x{width}")
    expected = 12 + 4 * height * width
    if len(data) != expected:
        raise RasterError(f"{path}: truncated F32M payload ({len(data)} != {expected} bytes)")
    vals = np.frombuffer(data, dtype="<f4", offset=12).reshape(height, width)
    if not np.all(np.isfinite(vals)):
        raise RasterError(f"{path}: non-finite float in raw heatmap")
    if vals.min() < 0.0 or vals.max() > 1.0:
        raise RasterError(f"{path}: raw heatmap value outside [0, 1]")
    return vals.astype(np.float32)


def _write_f32m(values: np.ndarray, path: Path) -> None:
    h, w = values.shape
    payload = values.astype("<f4", copy=False).tobytes()
    with open(path, "wb") as fh:
        fh.write(F32M_MAGIC)
        fh.write(struct.pack("<II", h, w))
        fh.write(payload)


# ---------------------------------------------------------------------------
# Label map / mask / image I/O
# ---------------------------------------------------------------------------


def load_labelmap(path: Path | str) -> LabelMap:
    """Load a label map from a 16-bit grayscale PNG (raw label ids)."""
    return LabelMap(_open_png_gray(path, bits=16).astype(np.int32))


def save_labelmap(m: LabelMap, path: Path | str) -> None:
    if m.labels.max(initial=0) > 65535:
        raise RasterError("label ids above 65535 cannot be stored in a 16-bit PNG")
    _save_png_gray16(m.labels.astype(np.uint16), path)


def load_mask(path: Path | str) -> BinaryMask:
    """Load a binary mask from an 8-bit grayscale PNG with values 0/255."""
    arr = _open_png_gray(path, bits=8)
    bad = ~np.isin(arr, (0, 255))
    if bad.any():
        raise RasterError(f"{path}: mask PNG must contain only 0 and 255")
    return BinaryMask(arr == 255)


def save_mask(mask: BinaryMask, path: Path | str) -> None:
    _save_png_gray8(np.where(mask.bits, 255, 0).astype(np.uint8), path)


def load_rgb(path: Path | str) -> RgbImage:
    """Load any PIL-readable image as an 8-bit RGB image."""
    path = Path(path)
    if not path.is_file():
        raise RasterError(f"no such file: {path}")
    try:
        with Image.open(path) as im:
            arr = np.asarray(im.convert("RGB"))
    except Exception as exc:
        raise RasterError(f"cannot decode {path}: {exc}") from exc
    return RgbImage(arr.astype(np.uint8))


def save_rgb(img: RgbImage, path: Path | str) -> None:
    if img.values.dtype != np.uint8:
        raise RasterError("only 8-bit RGB images can be saved")
    Image.fromarray(img.values).save(Path(path), format="PNG")


# ---------------------------------------------------------------------------
# Resampling
# ---------------------------------------------------------------------------


def _source_coords(n_out: int, n_in: int) -> np.ndarray:
    """Continuous source coordinates under the align-corners-false convention.

    Sample centers sit at (i + 0.5) * scale - 0.5, clamped to the valid range.
    """
    scale = n_in / n_out
    coords = (np.arange(n_out, dtype=np.float64) + 0.5) * scale - 0.5
    return np.clip(coords, 0.0, n_in - 1)


def resize_bilinear(h: Heatmap, out_w: int, out_h: int) -> Heatmap:
    """Bilinear resample of a heatmap (align-corners-false, edge-clamped).

    Exact on constant maps and the identity at equal dims; the output range
    never exceeds the input range.
    """
    if out_w < 1 or out_h < 1:
        raise RasterError(f"target dimensions must be >= 1, got {out_w}x{out_h}")
    if out_w == h.width and out_h == h.height:
        return h
    src = h.values.astype(np.float64)
    in_h, in_w = src.shape

    ys = _source_coords(out_h, in_h)
    xs = _source_coords(out_w, in_w)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]

    # lerp form keeps constant inputs bit-exact
    tl = src[np.ix_(y0, x0)]
    tr = src[np.ix_(y0, x1)]
    bl = src[np.ix_(y1, x0)]
    br = src[np.ix_(y1, x1)]
    top = tl + fx * (tr - tl)
    bot = bl + fx * (br - bl)
    out = top + fy * (bot - top)

    out = np.clip(out, src.min(), src.max())
    return Heatmap(out.astype(np.float32))


def _nearest_indices(n_out: int, n_in: int) -> np.ndarray:
    idx = np.floor((np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out))
    return np.clip(idx, 0, n_in - 1).astype(np.intp)


def resize_nearest(m: LabelMap | BinaryMask, out_w: int, out_h: int):
    """Nearest-neighbour resample; never interpolates or invents labels."""
    if out_w < 1 or out_h < 1:
        raise RasterError(f"target dimensions must be >= 1, got {out_w}x{out_h}")
    if isinstance(m, LabelMap):
        grid = m.labels
    elif isinstance(m, BinaryMask):
        grid = m.bits
    else:
        raise TypeError(f"resize_nearest expects LabelMap or BinaryMask, got {type(m).__name__}")
    if out_w == grid.shape[1] and out_h == grid.shape[0]:
        return m
    ys = _nearest_indices(out_h, grid.shape[0])
    xs = _nearest_indices(out_w, grid.shape[1])
    picked = grid[np.ix_(ys, xs)]
    return LabelMap(picked) if isinstance(m, LabelMap) else BinaryMask(picked)


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------


def normalize_minmax(h: Heatmap) -> Heatmap:
    """Rescale to span [0, 1]; a constant map becomes all zeros."""
    v = h.values.astype(np.float64)
    lo = v.min()
    hi = v.max()
    if hi <= lo:
        return Heatmap(np.zeros_like(v, dtype=np.float32))
    out = (v - lo) / (hi - lo)
    return Heatmap(np.clip(out, 0.0, 1.0).astype(np.float32))
