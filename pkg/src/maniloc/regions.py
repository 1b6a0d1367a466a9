"""Candidate-region extraction, distance-weighted scoring and selection.

The similarity between a region mask M and an activation map A is the
size-normalized sum of activation weighted by interior depth:

    S(M, A) = (1 / area(M)) * sum_p D(M)(p) * A(p)

where D is the exact EDT of the isolated mask (zero outside it, so the
sum effectively runs over the region interior). The selected region is
the argmax of S over all candidates, ties broken by smallest label id.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .edt import edt_exact
from .raster import BinaryMask, Heatmap, LabelMap, RasterError


@dataclass(frozen=True)
class RegionScore:
    label: int
    area: int
    score: float

    def __post_init__(self) -> None:
        if self.area < 1:
            raise ValueError("RegionScore area must be >= 1")
        if not np.isfinite(self.score) or self.score < 0.0:
            raise ValueError("RegionScore score must be finite and >= 0")


def extract_regions(m: LabelMap) -> list[tuple[int, BinaryMask]]:
    """One binary mask per distinct label >= 1, ordered by ascending label.

    Each mask is exactly the label's support; label 0 (background) is
    excluded. A background-only map yields an empty list.
    """
    return [(label, BinaryMask(m.labels == label)) for label in m.distinct_labels()]


def similarity(mask: BinaryMask, a: Heatmap) -> float:
    """Distance-weighted similarity S(mask, a); errors on an empty mask."""
    if mask.width != a.width or mask.height != a.height:
        raise RasterError(
            f"mask and heatmap dimensions differ: "
            f"{mask.width}x{mask.height} vs {a.width}x{a.height}"
        )
    area = mask.area
    if area < 1:
        raise ValueError("similarity is undefined for an empty mask")
    d = edt_exact(mask).values
    weighted = float(np.sum(d * a.values.astype(np.float64)))
    return weighted / area


def select_best_region(
    regions: list[tuple[int, BinaryMask]], a: Heatmap
) -> tuple[int, BinaryMask, list[RegionScore]]:
    """Score every candidate region and return the argmax.

    Returns (best_label, best_mask, scores) with the full score table in
    ascending label order for reporting. Ties go to the smallest label.
    """
    if not regions:
        raise ValueError("no candidate regions")
    scores: list[RegionScore] = []
    best: tuple[int, BinaryMask] | None = None
    best_score = -1.0
    for label, mask in sorted(regions, key=lambda r: r[0]):
        s = similarity(mask, a)
        scores.append(RegionScore(label=label, area=mask.area, score=s))
        if s > best_score:
            best = (label, mask)
            best_score = s
    assert best is not None
    return best[0], best[1], scores
