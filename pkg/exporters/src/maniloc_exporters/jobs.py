"""Export jobs: run the backends over an image directory and emit
maniloc-consumable files plus a provenance sidecar."""

from __future__ import annotations

import json
import logging
import platform
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .activations import make_activation_backend
from .formats import (
    normalize_minmax,
    write_heatmap_png16,
    write_labelmap_png16,
    write_manifest_file,
)
from .segmenters import SEGMENTER_CHOICES, make_segmenter

logger = logging.getLogger("maniloc_exporters")

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")

METADATA_FILE = "export-metadata.json"


class ExportError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExportJob:
    image_dir: Path
    out_dir: Path
    scales: tuple[int, ...] = (2, 3, 4)
    segmenter: str = "deeplab"
    device: str = "cpu"
    activation_backend: str = "residual-energy"
    segmenter_backend: str = "builtin"
    gt_dir: Path | None = None
    weights: Path | None = None
    jpeg_quality: int = 90

    def __post_init__(self) -> None:
        object.__setattr__(self, "image_dir", Path(self.image_dir))
        object.__setattr__(self, "out_dir", Path(self.out_dir))
        if self.gt_dir is not None:
            object.__setattr__(self, "gt_dir", Path(self.gt_dir))
        if len(self.scales) == 0:
            raise ValueError("scale list must be non-empty")
        if self.segmenter not in SEGMENTER_CHOICES:
            raise ValueError(f"segmenter must be one of {SEGMENTER_CHOICES}")


@dataclass
class ExportOutcome:
    written: list[str] = field(default_factory=list)
    skipped: list[tuple[str, str]] = field(default_factory=list)  # (image_id, reason)


def list_images(job: ExportJob) -> list[tuple[str, Path]]:
    if not job.image_dir.is_dir():
        raise ExportError(f"no such image directory: {job.image_dir}")
    pairs = sorted(
        (p.stem, p)
        for p in job.image_dir.iterdir()
        if p.suffix.lower() in IMAGE_EXTENSIONS and p.is_file()
    )
    return pairs


def _load_rgb(path: Path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB")).astype(np.uint8)


def _gt_path_for(job: ExportJob, image_id: str) -> Path | None:
    if job.gt_dir is None:
        return None
    for candidate in (job.gt_dir / f"{image_id}.gt.png", job.gt_dir / f"{image_id}.png"):
        if candidate.is_file():
            return candidate
    return None


def export_gradcam_stack(job: ExportJob) -> ExportOutcome:
    """Write one min-max-normalized png16 heatmap per scale per image."""
    backend = make_activation_backend(
        job.activation_backend,
        quality=job.jpeg_quality,
        weights=job.weights,
        device=job.device,
    )
    job.out_dir.mkdir(parents=True, exist_ok=True)
    outcome = ExportOutcome()
    for image_id, path in list_images(job):
        try:
            rgb = _load_rgb(path)
            stack = backend.activation_stack(rgb, job.scales)
            for scale in job.scales:
                name = f"{image_id}.a{scale}.png"
                write_heatmap_png16(normalize_minmax(stack[scale]), job.out_dir / name)
                outcome.written.append(name)
        except Exception as exc:
            logger.warning("activation export failed for %s: %s", image_id, exc)
            outcome.skipped.append((image_id, str(exc)))
    return outcome


def export_labelmap(job: ExportJob) -> ExportOutcome:
    """Write one 16-bit label PNG per image (anonymous region ids >= 1)."""
    segmenter = make_segmenter(
        job.segmenter, backend=job.segmenter_backend, weights=job.weights, device=job.device
    )
    job.out_dir.mkdir(parents=True, exist_ok=True)
    outcome = ExportOutcome()
    for image_id, path in list_images(job):
        try:
            labels = segmenter.label_map(_load_rgb(path))
            name = f"{image_id}.seg.png"
            write_labelmap_png16(labels, job.out_dir / name)
            outcome.written.append(name)
        except Exception as exc:
            logger.warning("segmentation export failed for %s: %s", image_id, exc)
            outcome.skipped.append((image_id, str(exc)))
    return outcome


def write_manifest(job: ExportJob, *, exclude: frozenset[str] | set[str] = frozenset()) -> Path:
    """Assemble the manifest from the exported files; error on gaps.

    Ground-truth paths are included only when a gt directory was supplied;
    gt and source paths are written absolute, activation/label paths
    relative to the manifest. Images in `exclude` (e.g. skipped by the
    backends) are left out instead of being reported as missing.
    """
    records = []
    missing: list[str] = []
    for image_id, src in list_images(job):
        if image_id in exclude:
            continue
        expected = [f"{image_id}.a{s}.png" for s in job.scales] + [f"{image_id}.seg.png"]
        gaps = [name for name in expected if not (job.out_dir / name).is_file()]
        if gaps:
            missing.append(f"{image_id}: {', '.join(gaps)}")
            continue
        gt = _gt_path_for(job, image_id)
        records.append(
            {
                "image_id": image_id,
                "activation_paths": [f"{image_id}.a{s}.png" for s in job.scales],
                "labelmap_path": f"{image_id}.seg.png",
                "gt_path": str(gt.resolve()) if gt else None,
                "source_image_path": str(src.resolve()),
            }
        )
    if missing:
        raise ExportError("missing expected export files:\n  " + "\n  ".join(missing))
    manifest_path = job.out_dir / "manifest.jsonl"
    write_manifest_file(records, manifest_path)
    return manifest_path


def run_export(job: ExportJob) -> Path:
    """Full export: activations, label maps, manifest, provenance sidecar."""
    acts = export_gradcam_stack(job)
    segs = export_labelmap(job)
    skipped_ids = {image_id for image_id, _ in acts.skipped + segs.skipped}
    if skipped_ids:
        # drop incomplete images from the manifest rather than failing it
        for image_id in skipped_ids:
            for p in job.out_dir.glob(f"{image_id}.*"):
                p.unlink()
    manifest = write_manifest(job, exclude=skipped_ids)

    backend = make_activation_backend(
        job.activation_backend, quality=job.jpeg_quality, weights=job.weights, device=job.device
    )
    segmenter = make_segmenter(
        job.segmenter, backend=job.segmenter_backend, weights=job.weights, device=job.device
    )
    import PIL
    import skimage

    metadata = {
        "activation": backend.describe(),
        "segmenter": segmenter.describe(),
        "scales": list(job.scales),
        "skipped": sorted(skipped_ids),
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "pillow": PIL.__version__,
            "scikit-image": skimage.__version__,
        },
    }
    (job.out_dir / METADATA_FILE).write_text(
        json.dumps(metadata, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return manifest
