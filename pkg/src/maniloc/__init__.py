"""Weakly-supervised manipulation localization toolkit.

Fuses multi-scale activation heatmaps, scores segmentation regions with a
distance-transform-weighted similarity, refines the heatmap with a
Bayesian update against the best-matching region, and evaluates pixel-wise
AUC/F1 - all on file-based rasters.
"""

__version__ = "0.1.0"

from .bayes import LikelihoodParams, bernoulli_posterior, refine_bayes
from .edt import DistanceField, edt_bruteforce, edt_exact
from .ela import (
    SignedResidual,
    codec_info,
    recompress_jpeg,
    residual_to_heatmap_preview,
    signed_ela,
    signed_residual,
)
from .fusion import FusionConfig, fuse_arithmetic, fuse_geometric, fuse_max
from .manifest import ManifestError, ManifestRecord, parse_manifest, write_manifest
from .metrics import (
    ConfusionCounts,
    DegenerateGroundTruth,
    EvalReport,
    evaluate,
    f1_at_threshold,
    roc_auc,
    threshold_sweep,
)
from .pipeline import (
    BatchSummary,
    RunConfig,
    RunResult,
    StageError,
    render_overlay,
    run_batch,
    run_image,
)
from .raster import (
    BinaryMask,
    GrayImage,
    Heatmap,
    LabelMap,
    RasterError,
    RgbImage,
    load_heatmap,
    load_labelmap,
    load_mask,
    load_rgb,
    normalize_minmax,
    resize_bilinear,
    resize_nearest,
    save_heatmap,
    save_labelmap,
    save_mask,
    save_rgb,
)
from .regions import RegionScore, extract_regions, select_best_region, similarity
from .synth import SyntheticCase, gen_suite, gen_synthetic

__all__ = [
    "BatchSummary",
    "BinaryMask",
    "ConfusionCounts",
    "DegenerateGroundTruth",
    "DistanceField",
    "EvalReport",
    "FusionConfig",
    "GrayImage",
    "Heatmap",
    "LabelMap",
    "LikelihoodParams",
    "ManifestError",
    "ManifestRecord",
    "RasterError",
    "RegionScore",
    "RgbImage",
    "RunConfig",
    "RunResult",
    "SignedResidual",
    "StageError",
    "SyntheticCase",
    "bernoulli_posterior",
    "codec_info",
    "edt_bruteforce",
    "edt_exact",
    "evaluate",
    "extract_regions",
    "f1_at_threshold",
    "fuse_arithmetic",
    "fuse_geometric",
    "fuse_max",
    "gen_suite",
    "gen_synthetic",
    "load_heatmap",
    "load_labelmap",
    "load_mask",
    "load_rgb",
    "normalize_minmax",
    "parse_manifest",
    "recompress_jpeg",
    "refine_bayes",
    "render_overlay",
    "residual_to_heatmap_preview",
    "resize_bilinear",
    "resize_nearest",
    "roc_auc",
    "run_batch",
    "run_image",
    "save_heatmap",
    "save_labelmap",
    "save_mask",
    "save_rgb",
    "select_best_region",
    "signed_ela",
    "signed_residual",
    "similarity",
    "threshold_sweep",
    "write_manifest",
]
