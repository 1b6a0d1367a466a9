"""Deterministic synthetic scenarios for desk-scale pipeline verification.

Each case materializes one manifest record on disk: a ground-truth mask
(ellipse or rectangle), a label map holding the ground-truth region plus
disjoint distractor regions, and one activation map per scale built by
box-blurring the ground-truth mask at a scale-dependent radius and adding
seeded Gaussian noise. Deeper scales get larger radii, mimicking how
low-resolution activation maps lose detail near region edges.

Distractor regions receive labels 1..k and the ground-truth region the
label k+1, so the smallest-label tie-break can never favor the ground
truth; the assigned label is recorded in a `<id>.case.json` sidecar.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import uniform_filter

from .manifest import ManifestRecord, write_manifest
from .raster import BinaryMask, Heatmap, LabelMap, save_heatmap, save_labelmap, save_mask

SCALES = (2, 3, 4)


class GeometryError(RuntimeError):
    """Could not place the requested disjoint regions."""


@dataclass(frozen=True)
class SyntheticCase:
    seed: int
    width: int = 128
    height: int = 128
    shape: str = "auto"  # "ellipse", "rect" or "auto" (chosen per seed)
    distractors: int = 3
    blur_radius: int = 4
    noise_sigma: float = 0.18

    def __post_init__(self) -> None:
        if self.width < 16 or self.height < 16:
            raise ValueError("synthetic cases need dims >= 16x16")
        if self.shape not in ("auto", "ellipse", "rect"):
            raise ValueError(f"unknown gt shape {self.shape!r}")
        if self.distractors < 0:
            raise ValueError("distractor count must be >= 0")
        if self.blur_radius < 0 or self.noise_sigma < 0:
            raise ValueError("blur radius and noise sigma must be >= 0")


def _raster_shape(
    rng: np.random.Generator,
    h: int,
    w: int,
    area_lo: float,
    area_hi: float,
    kind: str,
) -> np.ndarray:
    """Rasterize one ellipse/rectangle with area fraction in [area_lo, area_hi]."""
    for _ in range(200):
        frac = rng.uniform(area_lo, area_hi)
        aspect = rng.uniform(0.5, 2.0)
        if kind == "ellipse":
            ab = frac * h * w / np.pi
            a = np.sqrt(ab * aspect)
            b = ab / a
            cy = rng.uniform(b, h - b) if h > 2 * b else h / 2
            cx = rng.uniform(a, w - a) if w > 2 * a else w / 2
            yy, xx = np.mgrid[0:h, 0:w]
            grid = ((xx - cx) / max(a, 1e-9)) ** 2 + ((yy - cy) / max(b, 1e-9)) ** 2 <= 1.0
        else:
            area = frac * h * w
            rw = np.sqrt(area * aspect)
            rh = area / rw
            rw, rh = int(round(rw)), int(round(rh))
            if rw < 2 or rh < 2 or rw >= w or rh >= h:
                continue
            y0 = int(rng.integers(0, h - rh + 1))
            x0 = int(rng.integers(0, w - rw + 1))
            grid = np.zeros((h, w), dtype=bool)
            grid[y0 : y0 + rh, x0 : x0 + rw] = True
        got = grid.sum() / (h * w)
        if area_lo * 0.5 <= got <= min(2 * area_hi, 0.5) and grid.sum() >= max(1, h * w // 100):
            return grid
    raise GeometryError("could not rasterize a region within the area bounds")


def _box_blur(mask_f: np.ndarray, radius: int) -> np.ndarray:
    if radius <= 0:
        return mask_f
    size = 2 * radius + 1
    return uniform_filter(mask_f, size=size, mode="constant", cval=0.0)


def build_case_arrays(case: SyntheticCase) -> dict:
    """Generate the in-memory rasters for one case (no file I/O).

    Returns gt mask, label map, per-scale activations and the gt label.
    """
    rng = np.random.default_rng(case.seed)
    h, w = case.height, case.width
    kind = case.shape if case.shape != "auto" else ("ellipse" if rng.random() < 0.5 else "rect")

    gt = _raster_shape(rng, h, w, 0.04, 0.18, kind)

    labels = np.zeros((h, w), dtype=np.int32)
    occupied = gt.copy()
    placed = 0
    attempts = 0
    while placed < case.distractors:
        attempts += 1
        if attempts > 60 * max(1, case.distractors):
            raise GeometryError(
                f"could not place {case.distractors} disjoint distractors (seed {case.seed})"
            )
        d_kind = "ellipse" if rng.random() < 0.5 else "rect"
        cand = _raster_shape(rng, h, w, 0.01, 0.05, d_kind)
        if np.any(cand & occupied):
            continue
        placed += 1
        labels[cand] = placed  # distractors take labels 1..k
        occupied |= cand
    gt_label = case.distractors + 1
    labels[gt] = gt_label

    activations: dict[int, np.ndarray] = {}
    base = gt.astype(np.float64)
    for scale in SCALES:
        radius = case.blur_radius * (2 ** (scale - 2))
        blurred = _box_blur(base, radius)
        noisy = blurred + rng.normal(0.0, case.noise_sigma, size=(h, w))
        activations[scale] = np.clip(noisy, 0.0, 1.0).astype(np.float32)

    return {
        "gt": BinaryMask(gt),
        "labelmap": LabelMap(labels),
        "activations": {s: Heatmap(a) for s, a in activations.items()},
        "gt_label": gt_label,
    }


def gen_synthetic(case: SyntheticCase, out_dir: Path | str, image_id: str | None = None) -> ManifestRecord:
    """Materialize one case on disk and return its manifest record.

    Files (relative paths, deterministic bytes for a fixed seed):
      <id>.a{2,3,4}.png  activation maps (png16)
      <id>.seg.png       label map
      <id>.gt.png        ground-truth mask
      <id>.case.json     sidecar with the case parameters and gt label
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    image_id = image_id or f"synth-{case.seed:08d}"
    arrays = build_case_arrays(case)

    act_paths = []
    for scale in SCALES:
        name = f"{image_id}.a{scale}.png"
        save_heatmap(arrays["activations"][scale], out_dir / name, format="png16")
        act_paths.append(name)
    seg_name = f"{image_id}.seg.png"
    gt_name = f"{image_id}.gt.png"
    save_labelmap(arrays["labelmap"], out_dir / seg_name)
    save_mask(arrays["gt"], out_dir / gt_name)

    sidecar = {
        "image_id": image_id,
        "seed": case.seed,
        "width": case.width,
        "height": case.height,
        "shape": case.shape,
        "distractors": case.distractors,
        "blur_radius": case.blur_radius,
        "noise_sigma": case.noise_sigma,
        "gt_label": arrays["gt_label"],
    }
    (out_dir / f"{image_id}.case.json").write_text(
        json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    return ManifestRecord(
        image_id=image_id,
        activation_paths=tuple(act_paths),
        labelmap_path=seg_name,
        gt_path=gt_name,
    )


def gen_suite(
    out_dir: Path | str,
    cases: int,
    base_seed: int = 0,
    *,
    width: int = 128,
    height: int = 128,
    distractors: int = 3,
    blur_radius: int = 4,
    noise_sigma: float = 0.18,
) -> Path:
    """Generate a suite of cases plus its manifest; returns the manifest path."""
    out_dir = Path(out_dir)
    records = []
    for i in range(cases):
        case = SyntheticCase(
            seed=base_seed + i,
            width=width,
            height=height,
            distractors=distractors,
            blur_radius=blur_radius,
            noise_sigma=noise_sigma,
        )
        records.append(gen_synthetic(case, out_dir))
    manifest_path = out_dir / "manifest.jsonl"
    write_manifest(records, manifest_path)
    return manifest_path
