"""Per-pixel Bayesian refinement of a heatmap against a selected region.

Each pixel's fused activation is read as a prior probability q of being
manipulated; membership in the selected region mask is the observed
evidence. With lambda_in = P(covered | manipulated) and
lambda_out = P(covered | not manipulated), the posterior is

    inside the mask:   lambda_in * q / (lambda_in * q + lambda_out * (1 - q))
    outside the mask:  (1 - lambda_in) * q / ((1 - lambda_in) * q + (1 - lambda_out) * (1 - q))

With lambda_in > lambda_out the update raises the prior inside the mask
and lowers it outside; lambda_in == lambda_out leaves the map unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import BinaryMask, Heatmap, RasterError


@dataclass(frozen=True)
class LikelihoodParams:
    """Coverage likelihoods of the selected region; 0 < lambda_out <= lambda_in < 1."""

    lambda_in: float = 0.9
    lambda_out: float = 0.1

    def __post_init__(self) -> None:
        if not (0.0 < self.lambda_out <= self.lambda_in < 1.0):
            raise ValueError(
                "LikelihoodParams require 0 < lambda_out <= lambda_in < 1, "
                f"got lambda_in={self.lambda_in}, lambda_out={self.lambda_out}"
            )


def bernoulli_posterior(prior, lik_if_pos: float, lik_if_neg: float):
    """Posterior P(positive | evidence) for a two-hypothesis Bernoulli update.

    prior may be a scalar or array; both likelihoods must be in (0, 1) so
    the denominator stays strictly positive for any prior in [0, 1].
    """
    q = np.asarray(prior, dtype=np.float64)
    num = lik_if_pos * q
    return num / (num + lik_if_neg * (1.0 - q))


def refine_bayes(a: Heatmap, mask: BinaryMask, params: LikelihoodParams | None = None) -> Heatmap:
    """Posterior heatmap given region membership as evidence."""
    params = params or LikelihoodParams()
    if mask.width != a.width or mask.height != a.height:
        raise RasterError(
            f"heatmap and mask dimensions differ: "
            f"{a.width}x{a.height} vs {mask.width}x{mask.height}"
        )
    q = a.values.astype(np.float64)
    inside = bernoulli_posterior(q, params.lambda_in, params.lambda_out)
    outside = bernoulli_posterior(q, 1.0 - params.lambda_in, 1.0 - params.lambda_out)
    posterior = np.where(mask.bits, inside, outside)
    return Heatmap(np.clip(posterior, 0.0, 1.0).astype(np.float32))
