import numpy as np
import pytest

from maniloc import (
    Heatmap,
    LabelMap,
    ManifestError,
    ManifestRecord,
    parse_manifest,
    save_heatmap,
    save_labelmap,
    write_manifest,
)
from maniloc.manifest import MANIFEST_HEADER


def materialize(tmp_path, image_id="img1"):
    """Write minimal rasters so file checks pass."""
    h = Heatmap(np.full((4, 4), 0.5, dtype=np.float32))
    for s in (2, 3):
        save_heatmap(h, tmp_path / f"{image_id}.a{s}.png")
    save_labelmap(LabelMap(np.ones((4, 4), dtype=np.int32)), tmp_path / f"{image_id}.seg.png")
    return ManifestRecord(
        image_id=image_id,
        activation_paths=(f"{image_id}.a2.png", f"{image_id}.a3.png"),
        labelmap_path=f"{image_id}.seg.png",
    )


def test_empty_manifest(tmp_path):
    p = tmp_path / "m.jsonl"
    p.write_text(MANIFEST_HEADER + "\n")
    assert parse_manifest(p) == []


def test_missing_header(tmp_path):
    p = tmp_path / "m.jsonl"
    p.write_text('{"image_id": "a"}\n')
    with pytest.raises(ManifestError, match="header"):
        parse_manifest(p)


def test_round_trip(tmp_path):
    recs = [
        materialize(tmp_path, "a"),
        ManifestRecord(
            image_id="b",
            activation_paths=("x.png",),
            labelmap_path="y.png",
            gt_path="g.png",
            source_image_path="s.png",
        ),
    ]
    p = tmp_path / "m.jsonl"
    write_manifest(recs, p)
    assert parse_manifest(p, check_files=False) == recs


def test_serialized_twice_is_identical(tmp_path):
    recs = [materialize(tmp_path)]
    p1, p2 = tmp_path / "m1.jsonl", tmp_path / "m2.jsonl"
    write_manifest(recs, p1)
    write_manifest(parse_manifest(p1), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_missing_field_named(tmp_path):
    p = tmp_path / "m.jsonl"
    p.write_text(MANIFEST_HEADER + '\n{"image_id": "a", "labelmap_path": "x.png"}\n')
    with pytest.raises(ManifestError, match="activation_paths"):
        parse_manifest(p, check_files=False)


def test_empty_activation_list_rejected(tmp_path):
    p = tmp_path / "m.jsonl"
    p.write_text(
        MANIFEST_HEADER + '\n{"image_id": "a", "activation_paths": [], "labelmap_path": "x"}\n'
    )
    with pytest.raises(ManifestError, match="at least one"):
        parse_manifest(p, check_files=False)


def test_duplicate_id_rejected(tmp_path):
    rec = materialize(tmp_path)
    p = tmp_path / "m.jsonl"
    write_manifest([rec], p)
    line = p.read_text().splitlines()[1]
    p.write_text(MANIFEST_HEADER + "\n" + line + "\n" + line + "\n")
    with pytest.raises(ManifestError, match="duplicate image_id"):
        parse_manifest(p)


def test_malformed_json_rejected(tmp_path):
    p = tmp_path / "m.jsonl"
    p.write_text(MANIFEST_HEADER + "\n{not json}\n")
    with pytest.raises(ManifestError, match="invalid JSON"):
        parse_manifest(p)


def test_unknown_field_rejected(tmp_path):
    p = tmp_path / "m.jsonl"
    p.write_text(
        MANIFEST_HEADER
        + '\n{"image_id": "a", "activation_paths": ["x"], "labelmap_path": "y", "extra": 1}\n'
    )
    with pytest.raises(ManifestError, match="unknown field"):
        parse_manifest(p, check_files=False)


def test_unreadable_file_names_image(tmp_path):
    rec = ManifestRecord(
        image_id="ghost", activation_paths=("missing.png",), labelmap_path="also-missing.png"
    )
    p = tmp_path / "m.jsonl"
    write_manifest([rec], p)
    with pytest.raises(ManifestError, match="ghost"):
        parse_manifest(p)


def test_comment_and_blank_lines_skipped(tmp_path):
    rec = materialize(tmp_path)
    p = tmp_path / "m.jsonl"
    write_manifest([rec], p)
    lines = p.read_text().splitlines()
    p.write_text(lines[0] + "\n\n# note\n" + lines[1] + "\n")
    assert parse_manifest(p) == [rec]
