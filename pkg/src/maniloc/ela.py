"""Signed error-level analysis: per-pixel JPEG recompression residuals.

The residual of an image against its own recompression at a chosen
quality exposes compression-inconsistency artifacts. It is kept signed
(not absolute-valued) and normalized by 255, so values lie in [-1, 1].
Residuals depend on the JPEG codec; the runtime codec is reported by
`codec_info()` and recorded in pipeline reports.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
import PIL
from PIL import Image

from .raster import Heatmap, RasterError, RgbImage


@dataclass(frozen=True)
class SignedResidual:
    """Float32 (H, W, 3) grid of signed recompression errors in [-1, 1]."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(np.asarray(self.values), dtype=np.float32)
        if v.ndim != 3 or v.shape[2] != 3 or v.shape[0] < 1 or v.shape[1] < 1:
            raise RasterError(f"SignedResidual must have shape (H, W, 3), got {v.shape}")
        if not np.all(np.isfinite(v)) or v.min() < -1.0 or v.max() > 1.0:
            raise RasterError("SignedResidual values must be finite and in [-1, 1]")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


def codec_info() -> str:
    """Identifier of the JPEG codec in use (residuals are codec-dependent)."""
    return f"Pillow {PIL.__version__}"


def _require_u8_rgb(img: RgbImage, what: str) -> None:
    if img.values.dtype != np.uint8:
        raise RasterError(f"{what} requires an 8-bit RGB image")


def recompress_jpeg(img: RgbImage, quality: int) -> RgbImage:
    """Encode to JPEG at the given quality and decode again, in memory."""
    if not (1 <= int(quality) <= 100):
        raise ValueError(f"JPEG quality must be in 1..100, got {quality}")
    _require_u8_rgb(img, "recompress_jpeg")
    try:
        buf = io.BytesIO()
        Image.fromarray(img.values).save(buf, format="JPEG", quality=int(quality))
        buf.seek(0)
        decoded = np.asarray(Image.open(buf).convert("RGB"))
    except Exception as exc:
        raise RasterError(f"JPEG codec failure: {exc}") from exc
    return RgbImage(decoded.astype(np.uint8))


def signed_residual(original: RgbImage, recompressed: RgbImage) -> SignedResidual:
    """(recompressed - original) / 255, per channel; antisymmetric under swap."""
    _require_u8_rgb(original, "signed_residual")
    _require_u8_rgb(recompressed, "signed_residual")
    if original.values.shape != recompressed.values.shape:
        raise RasterError("residual operands must share dimensions")
    diff = recompressed.values.astype(np.float64) - original.values.astype(np.float64)
    return SignedResidual((diff / 255.0).astype(np.float32))


def signed_ela(img: RgbImage, quality: int = 90) -> SignedResidual:
    """Signed error levels of an image against its quality-q recompression."""
    return signed_residual(img, recompress_jpeg(img, quality))


def residual_to_heatmap_preview(r: SignedResidual) -> Heatmap:
    """Visualization map: v -> (v + 1) / 2 per channel, then channel max."""
    shifted = (r.values.astype(np.float64) + 1.0) / 2.0
    return Heatmap(np.clip(shifted.max(axis=2), 0.0, 1.0).astype(np.float32))
