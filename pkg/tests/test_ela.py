import numpy as np
import pytest

from maniloc import (
    RasterError,
    RgbImage,
    recompress_jpeg,
    residual_to_heatmap_preview,
    signed_ela,
    signed_residual,
)
from maniloc.ela import SignedResidual, codec_info


def structured_image(seed: int, h: int = 96, w: int = 96) -> RgbImage:
    """Smooth gradients plus mild texture: JPEG-friendly synthetic content."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    base = np.stack(
        [
            128 + 90 * np.sin(xx / 17.0) * np.cos(yy / 23.0),
            128 + 90 * np.cos(xx / 29.0 + 1.0),
            128 + 90 * np.sin((xx + yy) / 31.0),
        ],
        axis=2,
    )
    noise = rng.normal(0, 6, size=(h, w, 3))
    return RgbImage(np.clip(base + noise, 0, 255).astype(np.uint8))


def test_solid_image_residual_bound():
    img = RgbImage(np.full((64, 64, 3), (120, 30, 200), dtype=np.uint8))
    res = signed_ela(img, quality=90)
    assert np.max(np.abs(res.values)) <= 4 / 255


def test_residual_range_and_dims():
    img = structured_image(1)
    res = signed_ela(img, quality=75)
    assert res.values.shape == (96, 96, 3)
    assert res.values.min() >= -1.0 and res.values.max() <= 1.0


def test_residual_is_signed_not_absolute():
    img = structured_image(2)
    res = signed_ela(img, quality=60)
    assert res.values.min() < 0.0  # lossy recompression undershoots somewhere


def test_antisymmetry_under_swap():
    a = structured_image(3)
    b = recompress_jpeg(a, 80)
    fwd = signed_residual(a, b).values
    rev = signed_residual(b, a).values
    assert np.array_equal(fwd, -rev)


def test_idempotence_tendency():
    original = structured_image(4)
    once = recompress_jpeg(original, 90)
    first = float(np.abs(signed_ela(original, 90).values).mean())
    second = float(np.abs(signed_ela(once, 90).values).mean())
    assert second < first


def test_invalid_quality():
    img = structured_image(5, 16, 16)
    for q in (0, 101, -3):
        with pytest.raises(ValueError):
            signed_ela(img, q)


def test_requires_8bit():
    img16 = RgbImage(np.zeros((8, 8, 3), dtype=np.uint16))
    with pytest.raises(RasterError):
        signed_ela(img16, 90)


def test_preview_zero_residual_is_half_gray():
    res = SignedResidual(np.zeros((4, 4, 3), dtype=np.float32))
    out = residual_to_heatmap_preview(res)
    assert np.all(out.values == np.float32(0.5))


def test_preview_endpoint():
    vals = np.zeros((1, 1, 3), dtype=np.float32)
    vals[0, 0] = (1.0, 0.0, 0.0)
    assert residual_to_heatmap_preview(SignedResidual(vals)).values[0, 0] == 1.0


def test_preview_channel_max():
    vals = np.zeros((1, 1, 3), dtype=np.float32)
    vals[0, 0] = (-1.0, 0.0, 0.5)
    # mapped channels: (0, 0.5, 0.75) -> max 0.75
    assert abs(float(residual_to_heatmap_preview(SignedResidual(vals)).values[0, 0]) - 0.75) <= 1e-7


def test_residual_validation():
    with pytest.raises(RasterError):
        SignedResidual(np.full((2, 2, 3), 1.5, dtype=np.float32))
    with pytest.raises(RasterError):
        SignedResidual(np.zeros((2, 2), dtype=np.float32))


def test_codec_info_names_codec():
    assert "Pillow" in codec_info()
