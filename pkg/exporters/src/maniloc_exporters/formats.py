"""Writers for the maniloc interchange formats.

Implemented against the published format contracts (16-bit grayscale PNG
heatmaps with v = round(x * 65535), 16-bit label PNGs holding raw ids,
8-bit 0/255 mask PNGs, line-delimited JSON manifests with a version
header); this package does not import the pipeline itself.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
from PIL import Image

MANIFEST_HEADER = "#maniloc-manifest v1"


class FormatError(ValueError):
    pass


def normalize_minmax(values: np.ndarray) -> np.ndarray:
    """Min-max normalize to [0, 1]; constant inputs become all zeros."""
    v = np.asarray(values, dtype=np.float64)
    lo, hi = v.min(), v.max()
    if hi <= lo:
        return np.zeros_like(v)
    return np.clip((v - lo) / (hi - lo), 0.0, 1.0)


def write_heatmap_png16(values: np.ndarray, path: Path | str) -> None:
    """Write a [0, 1] float map as a 16-bit grayscale PNG."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 2:
        raise FormatError(f"heatmap must be 2-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)) or v.min() < 0.0 or v.max() > 1.0:
        raise FormatError("heatmap values must be finite and in [0, 1]")
    q = np.rint(v * 65535.0).astype(np.uint16)
    Image.fromarray(q).save(Path(path), format="PNG")


def write_labelmap_png16(labels: np.ndarray, path: Path | str) -> None:
    """Write non-negative integer region labels as a 16-bit grayscale PNG."""
    lab = np.asarray(labels)
    if lab.ndim != 2 or not np.issubdtype(lab.dtype, np.integer):
        raise FormatError("label map must be a 2-D integer grid")
    if lab.min() < 0 or lab.max() > 65535:
        raise FormatError("label ids must be in 0..65535")
    Image.fromarray(lab.astype(np.uint16)).save(Path(path), format="PNG")


def write_mask_png8(bits: np.ndarray, path: Path | str) -> None:
    """Write a boolean mask as an 8-bit 0/255 PNG."""
    b = np.asarray(bits)
    if b.ndim != 2 or b.dtype != np.bool_:
        raise FormatError("mask must be a 2-D boolean grid")
    Image.fromarray(np.where(b, 255, 0).astype(np.uint8)).save(Path(path), format="PNG")


def manifest_line(record: Mapping[str, object]) -> str:
    obj: dict = {
        "image_id": record["image_id"],
        "activation_paths": list(record["activation_paths"]),
        "labelmap_path": record["labelmap_path"],
    }
    if record.get("gt_path"):
        obj["gt_path"] = record["gt_path"]
    if record.get("source_image_path"):
        obj["source_image_path"] = record["source_image_path"]
    return json.dumps(obj, separators=(", ", ": "))


def write_manifest_file(records: Iterable[Mapping[str, object]], path: Path | str) -> None:
    lines = [MANIFEST_HEADER] + [manifest_line(r) for r in records]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_manifest_file(path: Path | str) -> list[dict]:
    """Minimal reader for round-trip checks (the pipeline owns validation)."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != MANIFEST_HEADER:
        raise FormatError("missing manifest header")
    return [json.loads(ln) for ln in lines[1:] if ln.strip() and not ln.startswith("#")]
