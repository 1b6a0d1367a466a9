"""Manifest-driven orchestration: per-image runs, batches, reports, overlays.

Per-image stage order: resample -> fuse -> extract regions -> select best
region -> Bayes refine -> evaluate. When the label map yields no candidate
regions the refined map falls back to the fused map and the image is
flagged. Batch runs isolate per-image failures, write all artifacts from
the collecting thread in manifest order, and are byte-deterministic for a
fixed (manifest, config) regardless of worker count.
"""

from __future__ import annotations

import csv
import io
import json
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import PIL

from . import __version__
from .bayes import LikelihoodParams, refine_bayes
from .ela import codec_info
from .fusion import FusionConfig, fuse_geometric
from .manifest import ManifestRecord, parse_manifest, resolve_path
from .metrics import EvalReport, evaluate, roc_auc
from .raster import (
    BinaryMask,
    Heatmap,
    LabelMap,
    RgbImage,
    load_heatmap,
    load_labelmap,
    load_mask,
    load_rgb,
    resize_bilinear,
    resize_nearest,
    save_heatmap,
    save_mask,
)
from .regions import RegionScore, extract_regions, select_best_region

DEFAULT_DIMS = (384, 384)  # canonical fallback when no gt/source fixes the grid

FALLBACK_FLAG = "no-region-fallback"


@dataclass(frozen=True)
class RunConfig:
    fusion: FusionConfig = field(default_factory=FusionConfig)
    likelihood: LikelihoodParams = field(default_factory=LikelihoodParams)
    threshold: float = 0.5
    target_dims: tuple[int, int] | None = None  # None: gt dims, else source, else DEFAULT_DIMS
    workers: int = 1
    aggregation: str = "macro"

    def __post_init__(self) -> None:
        if not (0.0 <= self.threshold <= 1.0):
            raise ValueError(f"threshold must be in [0, 1], got {self.threshold}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.aggregation not in ("macro", "micro"):
            raise ValueError(f"aggregation must be 'macro' or 'micro', got {self.aggregation!r}")
        if self.target_dims is not None:
            w, h = self.target_dims
            if w < 1 or h < 1:
                raise ValueError(f"target dims must be >= 1, got {self.target_dims}")


class StageError(RuntimeError):
    """A pipeline stage failed for one image."""

    def __init__(self, image_id: str, stage: str, cause: Exception):
        super().__init__(f"image {image_id!r}, stage {stage!r}: {cause}")
        self.image_id = image_id
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class RunResult:
    image_id: str
    refined: Heatmap
    fused: Heatmap
    selected_label: int | None
    scores: tuple[RegionScore, ...]
    fallback: bool
    refined_eval: EvalReport | None
    fused_eval: EvalReport | None


# ---------------------------------------------------------------------------
# Per-image run
# ---------------------------------------------------------------------------


def _target_dims(
    cfg: RunConfig, gt: BinaryMask | None, source: RgbImage | None
) -> tuple[int, int]:
    if cfg.target_dims is not None:
        return cfg.target_dims
    if gt is not None:
        return gt.width, gt.height
    if source is not None:
        return source.width, source.height
    return DEFAULT_DIMS


def run_image(
    rec: ManifestRecord,
    cfg: RunConfig,
    base_dir: Path | str = ".",
    debug_dir: Path | str | None = None,
) -> RunResult:
    """Full single-image pipeline; stage failures carry image_id and stage."""
    base = Path(base_dir)

    def stage(name):
        def wrap(fn, *args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except Exception as exc:
                raise StageError(rec.image_id, name, exc) from exc

        return wrap

    ld = stage("load")
    activations = [ld(load_heatmap, resolve_path(base, p)) for p in rec.activation_paths]
    labelmap: LabelMap = ld(load_labelmap, resolve_path(base, rec.labelmap_path))
    gt = ld(load_mask, resolve_path(base, rec.gt_path)) if rec.gt_path else None
    source = ld(load_rgb, resolve_path(base, rec.source_image_path)) if rec.source_image_path else None

    w, h = _target_dims(cfg, gt, source)
    rs = stage("resample")
    activations = [rs(resize_bilinear, a, w, h) for a in activations]
    labelmap = rs(resize_nearest, labelmap, w, h)
    if gt is not None:
        gt = rs(resize_nearest, gt, w, h)

    fused = stage("fuse")(fuse_geometric, activations, cfg.fusion)

    regions = stage("regions")(extract_regions, labelmap)
    if regions:
        selected_label, selected_mask, scores = stage("score")(
            select_best_region, regions, fused
        )
        refined = stage("refine")(refine_bayes, fused, selected_mask, cfg.likelihood)
        fallback = False
    else:
        selected_label, selected_mask, scores = None, None, []
        refined = fused
        fallback = True

    refined_eval = fused_eval = None
    if gt is not None:
        ev = stage("evaluate")
        refined_eval = ev(evaluate, refined, gt, cfg.threshold)
        fused_eval = ev(evaluate, fused, gt, cfg.threshold)

    if debug_dir is not None:
        dbg = Path(debug_dir)
        dbg.mkdir(parents=True, exist_ok=True)
        scale_ids = (
            cfg.fusion.scales
            if len(cfg.fusion.scales) == len(activations)
            else tuple(range(len(activations)))
        )
        for scale, a in zip(scale_ids, activations):
            save_heatmap(a, dbg / f"{rec.image_id}.resampled.a{scale}.png")
        save_heatmap(fused, dbg / f"{rec.image_id}.fused.png")
        if selected_mask is not None:
            save_mask(selected_mask, dbg / f"{rec.image_id}.selected.png")
        save_heatmap(refined, dbg / f"{rec.image_id}.refined.png")

    return RunResult(
        image_id=rec.image_id,
        refined=refined,
        fused=fused,
        selected_label=selected_label,
        scores=tuple(scores),
        fallback=fallback,
        refined_eval=refined_eval,
        fused_eval=fused_eval,
    )


# ---------------------------------------------------------------------------
# Batch run
# ---------------------------------------------------------------------------


CSV_HEADER = [
    "image_id",
    "auc",
    "f1",
    "precision",
    "recall",
    "threshold",
    "selected_label",
    "fallback_flag",
]


@dataclass(frozen=True)
class Aggregate:
    images: int
    auc: float | None
    f1: float | None
    precision: float | None
    recall: float | None


@dataclass(frozen=True)
class BatchSummary:
    total: int
    succeeded: int
    failed: int
    fallbacks: int
    refined_agg: Aggregate | None
    fused_agg: Aggregate | None
    failures: tuple[tuple[str, str], ...]  # (image_id, message)


def _fmt(x: float | None) -> str:
    return "" if x is None else f"{x:.6f}"


def _macro(values: list[float]) -> float | None:
    return float(np.mean(values)) if values else None


def _aggregate(
    results: list[RunResult],
    which: str,
    mode: str,
    pixel_pool: dict[str, list[tuple[np.ndarray, np.ndarray]]],
) -> Aggregate | None:
    evals = [(r, getattr(r, f"{which}_eval")) for r in results if getattr(r, f"{which}_eval")]
    if not evals:
        return None
    if mode == "macro":
        return Aggregate(
            images=len(evals),
            auc=_macro([e.auc for _, e in evals if e.auc is not None]),
            f1=_macro([e.f1 for _, e in evals]),
            precision=_macro([e.precision for _, e in evals]),
            recall=_macro([e.recall for _, e in evals]),
        )
    # micro: pool confusion counts and pixels across images
    tp = sum(e.counts.tp for _, e in evals)
    fp = sum(e.counts.fp for _, e in evals)
    fn = sum(e.counts.fn for _, e in evals)
    precision = tp / (tp + fp) if (tp + fp) > 0 else 0.0
    recall = tp / (tp + fn) if (tp + fn) > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) > 0 else 0.0
    auc = None
    pool = pixel_pool.get(which, [])
    if pool:
        preds = np.concatenate([p.ravel() for p, _ in pool])
        gts = np.concatenate([g.ravel() for _, g in pool])
        if gts.any() and not gts.all():
            auc = roc_auc(Heatmap(preds[None, :]), BinaryMask(gts[None, :]))
    return Aggregate(images=len(evals), auc=auc, f1=f1, precision=precision, recall=recall)


def run_batch(
    manifest_path: Path | str,
    cfg: RunConfig,
    out_dir: Path | str,
    *,
    allowlist: Path | str | None = None,
    debug: bool = False,
) -> BatchSummary:
    """Run every manifest record, write artifacts and reports, return a summary.

    Per-image failures never abort the batch. Outputs: per-image fused and
    refined heatmaps (png16 + f32raw), a per-image JSON report with the
    region score table, metrics.csv, and summary.txt comparing the fused
    and refined aggregates.
    """
    manifest_path = Path(manifest_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = parse_manifest(manifest_path)
    if allowlist is not None:
        wanted = {
            ln.strip()
            for ln in Path(allowlist).read_text(encoding="utf-8").splitlines()
            if ln.strip() and not ln.strip().startswith("#")
        }
        records = [r for r in records if r.image_id in wanted]
    base = manifest_path.parent
    debug_dir = out / "debug" if debug else None

    def work(rec: ManifestRecord) -> RunResult | StageError:
        try:
            return run_image(rec, cfg, base, debug_dir=debug_dir)
        except StageError as exc:
            return exc
        except Exception as exc:  # isolate anything unexpected as well
            return StageError(rec.image_id, "internal", exc)

    if cfg.workers == 1:
        outcomes = [work(r) for r in records]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            outcomes = list(pool.map(work, records))

    results: list[RunResult] = []
    failures: list[tuple[str, str]] = []
    pixel_pool: dict[str, list[tuple[np.ndarray, np.ndarray]]] = {"refined": [], "fused": []}

    csv_buf = io.StringIO()
    writer = csv.writer(csv_buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)

    for rec, outcome in zip(records, outcomes):
        if isinstance(outcome, StageError):
            failures.append((rec.image_id, str(outcome)))
            continue
        res = outcome
        results.append(res)
        save_heatmap(res.fused, out / f"{rec.image_id}.fused.png", "png16")
        save_heatmap(res.fused, out / f"{rec.image_id}.fused.f32", "f32raw")
        save_heatmap(res.refined, out / f"{rec.image_id}.refined.png", "png16")
        save_heatmap(res.refined, out / f"{rec.image_id}.refined.f32", "f32raw")
        _write_image_report(res, out / f"{rec.image_id}.report.json")
        ev = res.refined_eval
        writer.writerow(
            [
                res.image_id,
                _fmt(ev.auc if ev else None),
                _fmt(ev.f1 if ev else None),
                _fmt(ev.precision if ev else None),
                _fmt(ev.recall if ev else None),
                _fmt(cfg.threshold),
                "" if res.selected_label is None else str(res.selected_label),
                FALLBACK_FLAG if res.fallback else "",
            ]
        )
        if cfg.aggregation == "micro" and res.refined_eval is not None:
            gt = load_mask(resolve_path(base, rec.gt_path))
            gt = resize_nearest(gt, res.refined.width, res.refined.height)
            pixel_pool["refined"].append((res.refined.values, gt.bits))
            pixel_pool["fused"].append((res.fused.values, gt.bits))

    (out / "metrics.csv").write_text(csv_buf.getvalue(), encoding="utf-8")

    summary = BatchSummary(
        total=len(records),
        succeeded=len(results),
        failed=len(failures),
        fallbacks=sum(1 for r in results if r.fallback),
        refined_agg=_aggregate(results, "refined", cfg.aggregation, pixel_pool),
        fused_agg=_aggregate(results, "fused", cfg.aggregation, pixel_pool),
        failures=tuple(failures),
    )
    (out / "summary.txt").write_text(_render_summary(summary, cfg), encoding="utf-8")
    return summary


def _write_image_report(res: RunResult, path: Path) -> None:
    def eval_obj(ev: EvalReport | None):
        if ev is None:
            return None
        return {
            "auc": ev.auc,
            "f1": ev.f1,
            "precision": ev.precision,
            "recall": ev.recall,
            "threshold": ev.threshold,
            "counts": {
                "tp": ev.counts.tp,
                "fp": ev.counts.fp,
                "tn": ev.counts.tn,
                "fn": ev.counts.fn,
            },
        }

    obj = {
        "image_id": res.image_id,
        "selected_label": res.selected_label,
        "fallback": res.fallback,
        "scores": [
            {"label": s.label, "area": s.area, "score": s.score} for s in res.scores
        ],
        "refined_eval": eval_obj(res.refined_eval),
        "fused_eval": eval_obj(res.fused_eval),
    }
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _render_summary(s: BatchSummary, cfg: RunConfig) -> str:
    lines = [
        "maniloc batch summary",
        f"version: {__version__}",
        f"python: {platform.python_version()}  numpy: {np.__version__}  pillow: {PIL.__version__}",
        f"codec: {codec_info()}",
        "",
        f"images: {s.total}  succeeded: {s.succeeded}  failed: {s.failed}  fallbacks: {s.fallbacks}",
        f"threshold: {cfg.threshold}  lambda_in: {cfg.likelihood.lambda_in}  "
        f"lambda_out: {cfg.likelihood.lambda_out}  epsilon: {cfg.fusion.epsilon}",
        f"aggregation: {cfg.aggregation}",
        "",
        "variant        images      auc       f1  precision   recall",
    ]

    def row(name: str, agg: Aggregate | None) -> str:
        if agg is None:
            return f"{name:<12} {'-':>7} {'-':>8} {'-':>8} {'-':>10} {'-':>8}"
        return (
            f"{name:<12} {agg.images:>7} {_fmt(agg.auc) or '-':>8} {_fmt(agg.f1) or '-':>8} "
            f"{_fmt(agg.precision) or '-':>10} {_fmt(agg.recall) or '-':>8}"
        )

    lines.append(row("fused-only", s.fused_agg))
    lines.append(row("refined", s.refined_agg))
    if s.failures:
        lines.append("")
        lines.append("failures:")
        for image_id, msg in s.failures:
            lines.append(f"  {image_id}: {msg}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Overlay rendering
# ---------------------------------------------------------------------------

_ANCHORS = np.array(
    [
        [0.0, 0.0, 255.0],  # value 0   -> blue
        [255.0, 255.0, 0.0],  # value 0.5 -> yellow
        [255.0, 0.0, 0.0],  # value 1   -> red
    ]
)


def heat_color(h: np.ndarray) -> np.ndarray:
    """Map values in [0, 1] to the fixed blue-yellow-red ramp (float RGB)."""
    h = np.asarray(h, dtype=np.float64)
    lo = np.clip(h * 2.0, 0.0, 1.0)[..., None]
    hi = np.clip(h * 2.0 - 1.0, 0.0, 1.0)[..., None]
    low_seg = _ANCHORS[0] + lo * (_ANCHORS[1] - _ANCHORS[0])
    high_seg = _ANCHORS[1] + hi * (_ANCHORS[2] - _ANCHORS[1])
    return np.where(h[..., None] <= 0.5, low_seg, high_seg)


def render_overlay(src: RgbImage, h: Heatmap, alpha: float) -> RgbImage:
    """Alpha-blend the colormapped heatmap over the source image."""
    if not (0.0 <= alpha <= 1.0):
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if src.width != h.width or src.height != h.height:
        raise ValueError(
            f"source and heatmap dimensions differ: "
            f"{src.width}x{src.height} vs {h.width}x{h.height}"
        )
    if src.values.dtype != np.uint8:
        raise ValueError("overlay rendering requires an 8-bit source image")
    color = heat_color(h.values)
    blended = (1.0 - alpha) * src.values.astype(np.float64) + alpha * color
    return RgbImage(np.rint(np.clip(blended, 0.0, 255.0)).astype(np.uint8))
