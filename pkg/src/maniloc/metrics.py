"""Pixel-wise evaluation: rank-based ROC-AUC and thresholded F1.

AUC uses the Mann-Whitney formulation with average ranks for ties:

    AUC = (R_pos - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg)

where R_pos is the sum of the (tie-averaged) ranks of the positive
pixels. Thresholding is inclusive (prediction >= tau counts as positive)
so tau = 1 remains meaningful for saturated maps, and every 0/0 metric
ratio resolves to 0.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import rankdata

from .raster import BinaryMask, Heatmap, RasterError


class DegenerateGroundTruth(ValueError):
    """Ground truth contains only one class; AUC is undefined."""


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class EvalReport:
    """Per-image metrics; auc is None when not computed (or undefined)."""

    auc: float | None
    f1: float
    precision: float
    recall: float
    threshold: float
    counts: ConfusionCounts

    def __post_init__(self) -> None:
        for name in ("f1", "precision", "recall", "threshold"):
            val = getattr(self, name)
            if not np.isfinite(val):
                raise ValueError(f"{name} must be finite, got {val}")
        if self.auc is not None and not (np.isfinite(self.auc) and 0.0 <= self.auc <= 1.0):
            raise ValueError(f"auc must be in [0, 1], got {self.auc}")


def _check_dims(pred: Heatmap, gt: BinaryMask) -> None:
    if pred.width != gt.width or pred.height != gt.height:
        raise RasterError(
            f"prediction and ground truth dimensions differ: "
            f"{pred.width}x{pred.height} vs {gt.width}x{gt.height}"
        )


def roc_auc(pred: Heatmap, gt: BinaryMask) -> float:
    """Pixel-wise ROC-AUC (Mann-Whitney with tie-averaged ranks)."""
    _check_dims(pred, gt)
    labels = gt.bits.ravel()
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateGroundTruth("degenerate ground truth: need both classes")
    ranks = rankdata(pred.values.ravel(), method="average")
    r_pos = float(ranks[labels].sum())
    return (r_pos - n_pos * (n_pos + 1) / 2.0) / (float(n_pos) * float(n_neg))


def f1_at_threshold(pred: Heatmap, gt: BinaryMask, tau: float) -> EvalReport:
    """Confusion counts and P/R/F1 with positives defined by pred >= tau."""
    _check_dims(pred, gt)
    if not (0.0 <= tau <= 1.0):
        raise ValueError(f"threshold must be in [0, 1], got {tau}")
    predicted = pred.values >= np.float64(tau)
    actual = gt.bits
    tp = int(np.sum(predicted & actual))
    fp = int(np.sum(predicted & ~actual))
    fn = int(np.sum(~predicted & actual))
    tn = int(np.sum(~predicted & ~actual))
    precision = tp / (tp + fp) if (tp + fp) > 0 else 0.0
    recall = tp / (tp + fn) if (tp + fn) > 0 else 0.0
    f1 = 2.0 * precision * recall / (precision + recall) if (precision + recall) > 0 else 0.0
    return EvalReport(
        auc=None,
        f1=f1,
        precision=precision,
        recall=recall,
        threshold=float(tau),
        counts=ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn),
    )


def evaluate(pred: Heatmap, gt: BinaryMask, tau: float) -> EvalReport:
    """Full per-image report; auc stays None on degenerate ground truth."""
    report = f1_at_threshold(pred, gt, tau)
    try:
        return replace(report, auc=roc_auc(pred, gt))
    except DegenerateGroundTruth:
        return report


def threshold_sweep(
    pred: Heatmap, gt: BinaryMask, steps: int
) -> list[tuple[float, EvalReport]]:
    """Reports on a uniform threshold grid over [0, 1] (diagnostic)."""
    if steps < 2:
        raise ValueError(f"steps must be >= 2, got {steps}")
    taus = np.linspace(0.0, 1.0, steps)
    return [(float(t), f1_at_threshold(pred, gt, float(t))) for t in taus]
