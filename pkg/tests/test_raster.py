import numpy as np
import pytest
from PIL import Image

from maniloc import (
    BinaryMask,
    Heatmap,
    LabelMap,
    RasterError,
    load_heatmap,
    load_labelmap,
    load_mask,
    normalize_minmax,
    resize_bilinear,
    resize_nearest,
    save_heatmap,
    save_labelmap,
    save_mask,
)

from conftest import heatmap, labelmap, mask


# ---------------------------------------------------------------------------
# type invariants
# ---------------------------------------------------------------------------


def test_heatmap_rejects_out_of_range():
    with pytest.raises(RasterError):
        Heatmap(np.array([[0.5, 1.5]], dtype=np.float32))
    with pytest.raises(RasterError):
        Heatmap(np.array([[-0.1]], dtype=np.float32))


def test_heatmap_rejects_nonfinite():
    with pytest.raises(RasterError):
        Heatmap(np.array([[np.nan]], dtype=np.float32))
    with pytest.raises(RasterError):
        Heatmap(np.array([[np.inf]], dtype=np.float32))


def test_heatmap_rejects_wrong_shape():
    with pytest.raises(RasterError):
        Heatmap(np.zeros((2, 2, 2), dtype=np.float32))
    with pytest.raises(RasterError):
        Heatmap(np.zeros((0, 3), dtype=np.float32))


def test_types_are_immutable():
    h = heatmap([[0.5]])
    with pytest.raises(ValueError):
        h.values[0, 0] = 0.2
    m = labelmap([[1]])
    with pytest.raises(ValueError):
        m.labels[0, 0] = 2


def test_labelmap_rejects_negative_and_float():
    with pytest.raises(RasterError):
        LabelMap(np.array([[-1]], dtype=np.int32))
    with pytest.raises(RasterError):
        LabelMap(np.array([[1.0]]))


def test_mask_requires_bool():
    with pytest.raises(RasterError):
        BinaryMask(np.array([[0, 1]], dtype=np.int32))


# ---------------------------------------------------------------------------
# heatmap file formats
# ---------------------------------------------------------------------------


def test_png16_known_values(tmp_path):
    # 65535 -> 1.0, 0 -> 0.0, 32768 -> 32768/65535 (direct division oracle)
    arr = np.array([[0, 32768, 65535]], dtype=np.uint16)
    Image.fromarray(arr).save(tmp_path / "h.png")
    h = load_heatmap(tmp_path / "h.png")
    assert h.values[0, 0] == 0.0
    assert h.values[0, 2] == 1.0
    assert abs(float(h.values[0, 1]) - 32768 / 65535) <= 1e-7


def test_png16_round_trip_within_quantum(tmp_path, rng):
    h = Heatmap(rng.random((17, 23), dtype=np.float32))
    save_heatmap(h, tmp_path / "h.png", "png16")
    back = load_heatmap(tmp_path / "h.png")
    assert np.max(np.abs(back.values.astype(np.float64) - h.values.astype(np.float64))) <= 1 / 65535


def test_png16_half_value_round_trip(tmp_path):
    h = heatmap([[0.5]])
    save_heatmap(h, tmp_path / "h.png", "png16")
    assert abs(float(load_heatmap(tmp_path / "h.png").values[0, 0]) - 0.5) <= 1 / 65535


def test_f32raw_round_trip_exact(tmp_path, rng):
    h = Heatmap(rng.random((9, 31), dtype=np.float32))
    save_heatmap(h, tmp_path / "h.f32", "f32raw")
    back = load_heatmap(tmp_path / "h.f32")
    assert np.array_equal(back.values, h.values)


def test_zero_map_round_trips(tmp_path):
    h = Heatmap(np.zeros((4, 4), dtype=np.float32))
    for fmt, name in (("png16", "z.png"), ("f32raw", "z.f32")):
        save_heatmap(h, tmp_path / name, fmt)
        assert np.all(load_heatmap(tmp_path / name).values == 0.0)


def test_load_heatmap_missing_file(tmp_path):
    with pytest.raises(RasterError, match="no such file"):
        load_heatmap(tmp_path / "absent.png")


def test_load_heatmap_rejects_rgb(tmp_path):
    Image.fromarray(np.zeros((4, 4, 3), dtype=np.uint8)).save(tmp_path / "rgb.png")
    with pytest.raises(RasterError, match="single-channel"):
        load_heatmap(tmp_path / "rgb.png")


def test_load_heatmap_rejects_8bit(tmp_path):
    Image.fromarray(np.zeros((4, 4), dtype=np.uint8)).save(tmp_path / "g8.png")
    with pytest.raises(RasterError, match="16-bit"):
        load_heatmap(tmp_path / "g8.png")


def test_f32raw_rejects_bad_payloads(tmp_path):
    good = tmp_path / "ok.f32"
    save_heatmap(heatmap([[0.25, 0.75]]), good, "f32raw")
    raw = bytearray(good.read_bytes())

    truncated = tmp_path / "trunc.f32"
    truncated.write_bytes(bytes(raw[:-2]))
    with pytest.raises(RasterError, match="truncated"):
        load_heatmap(truncated)

    nan_payload = tmp_path / "nan.f32"
    bad = bytearray(raw)
    bad[12:16] = np.array([np.nan], dtype="<f4").tobytes()
    nan_payload.write_bytes(bytes(bad))
    with pytest.raises(RasterError, match="non-finite"):
        load_heatmap(nan_payload)

    out_of_range = tmp_path / "oor.f32"
    bad = bytearray(raw)
    bad[12:16] = np.array([1.5], dtype="<f4").tobytes()
    out_of_range.write_bytes(bytes(bad))
    with pytest.raises(RasterError, match="outside"):
        load_heatmap(out_of_range)


def test_save_heatmap_unknown_format(tmp_path):
    with pytest.raises(ValueError, match="unknown heatmap format"):
        save_heatmap(heatmap([[0.0]]), tmp_path / "x", "tiff")


# ---------------------------------------------------------------------------
# label map / mask files
# ---------------------------------------------------------------------------


def test_labelmap_round_trip(tmp_path):
    m = labelmap([[0, 3], [7, 65535]])
    save_labelmap(m, tmp_path / "m.png")
    assert np.array_equal(load_labelmap(tmp_path / "m.png").labels, m.labels)


def test_labelmap_too_large_id(tmp_path):
    m = LabelMap(np.array([[70000]], dtype=np.int32))
    with pytest.raises(RasterError, match="65535"):
        save_labelmap(m, tmp_path / "m.png")


def test_mask_round_trip(tmp_path):
    m = mask([[True, False], [False, True]])
    save_mask(m, tmp_path / "m.png")
    assert np.array_equal(load_mask(tmp_path / "m.png").bits, m.bits)


def test_mask_rejects_intermediate_values(tmp_path):
    Image.fromarray(np.array([[0, 128]], dtype=np.uint8)).save(tmp_path / "bad.png")
    with pytest.raises(RasterError, match="0 and 255"):
        load_mask(tmp_path / "bad.png")


# ---------------------------------------------------------------------------
# resampling
# ---------------------------------------------------------------------------


def test_bilinear_constant_invariance():
    h = Heatmap(np.full((3, 5), 0.7, dtype=np.float32))
    out = resize_bilinear(h, 11, 7)
    assert np.all(out.values == np.float32(0.7))


def test_bilinear_identity():
    h = Heatmap(np.random.default_rng(1).random((6, 4), dtype=np.float32))
    out = resize_bilinear(h, 4, 6)
    assert np.array_equal(out.values, h.values)


def test_bilinear_1x2_to_1x4():
    # hand evaluation of (i + 0.5) * scale - 0.5 sampling, edge-clamped
    out = resize_bilinear(heatmap([[0.0, 1.0]]), 4, 1)
    assert np.allclose(out.values, [[0.0, 0.25, 0.75, 1.0]], atol=1e-7)


def test_bilinear_range_bounded(rng):
    h = Heatmap(0.2 + 0.6 * rng.random((8, 8), dtype=np.float32))
    out = resize_bilinear(h, 21, 13)
    assert out.values.min() >= h.values.min()
    assert out.values.max() <= h.values.max()


def test_bilinear_rejects_zero_dim():
    with pytest.raises(RasterError):
        resize_bilinear(heatmap([[0.5]]), 0, 3)


def test_nearest_identity():
    m = labelmap([[1, 2], [3, 4]])
    assert resize_nearest(m, 2, 2) is m


def test_nearest_checkerboard_blocks():
    m = labelmap([[1, 2], [2, 1]])
    out = resize_nearest(m, 4, 4)
    expected = np.array(
        [[1, 1, 2, 2], [1, 1, 2, 2], [2, 2, 1, 1], [2, 2, 1, 1]], dtype=np.int32
    )
    assert np.array_equal(out.labels, expected)


def test_nearest_label_set_preserved(rng):
    m = LabelMap(rng.integers(0, 5, size=(9, 7)).astype(np.int32))
    out = resize_nearest(m, 13, 3)
    assert set(np.unique(out.labels)) <= set(np.unique(m.labels))


def test_nearest_single_label_stays_single():
    m = labelmap([[5, 5], [5, 5]])
    out = resize_nearest(m, 7, 3)
    assert set(np.unique(out.labels)) == {5}


def test_nearest_mask_kind_preserved():
    m = mask([[True, False]])
    out = resize_nearest(m, 4, 2)
    assert isinstance(out, BinaryMask)
    with pytest.raises(RasterError):
        resize_nearest(m, 0, 1)


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------


def test_normalize_endpoints():
    out = normalize_minmax(heatmap([[0.2, 0.6]]))
    assert np.array_equal(out.values, np.array([[0.0, 1.0]], dtype=np.float32))


def test_normalize_constant_is_zero():
    out = normalize_minmax(Heatmap(np.full((2, 2), 0.4, dtype=np.float32)))
    assert np.all(out.values == 0.0)


def test_normalize_derived_case():
    out = normalize_minmax(heatmap([[0.1, 0.2, 0.5]]))
    assert np.allclose(out.values, [[0.0, 0.25, 1.0]], atol=1e-6)
