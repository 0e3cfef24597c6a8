"""Discretized orientation distributions on the circle.

Angles are degrees throughout.  The circle is split into ``n`` equal
bins of width ``w = 360 / n``; bin ``j`` covers ``[j*w - w/2, j*w + w/2)``
so bin centers sit at ``j * w``.  Distributions are probability vectors
over the bins (non-negative, summing to 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BinCountMismatch, EmptyInput, LengthMismatch, NonPositiveSigma

DEFAULT_TARGET_SIGMA = 4.0


def normalize_angle(degrees: float) -> float:
    """Wrap an angle to [0, 360)."""
    return degrees % 360.0


def angular_distance(a: float, b: float) -> float:
    """Shortest arc between two angles in degrees, in [0, 180]."""
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)


def _wrapped_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)) % 360.0
    return np.minimum(d, 360.0 - d)


@dataclass(frozen=True, eq=False)
class OrientationDistribution:
    """Probability distribution over n equally spaced orientation bins."""

    bins: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, OrientationDistribution):
            return NotImplemented
        return np.array_equal(self.bins, other.bins)

    def __post_init__(self):
        arr = np.asarray(self.bins, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise BinCountMismatch(f"need a 1-D vector of >= 2 bins, got shape {arr.shape}")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("bin probabilities must be finite and non-negative")
        total = float(arr.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"bin probabilities must sum to 1, got {total!r}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "bins", arr)

    @classmethod
    def from_scores(cls, scores: Sequence[float]) -> "OrientationDistribution":
        """Normalize non-negative scores into a distribution."""
        arr = np.asarray(scores, dtype=float)
        total = float(arr.sum())
        if total <= 0:
            raise ValueError("scores must have positive total mass")
        return cls(arr / total)

    @property
    def n(self) -> int:
        return int(self.bins.size)

    @property
    def bin_width(self) -> float:
        return 360.0 / self.n


def bin_centers(n: int) -> np.ndarray:
    """Centers of the n orientation bins, in degrees."""
    return np.arange(n) * (360.0 / n)


def circular_gaussian_pdf(mu: float, sigma: float, tau) -> np.ndarray:
    """Gaussian density evaluated on the wrapped distance between mu and tau."""
    if sigma <= 0:
        raise NonPositiveSigma(f"sigma must be > 0, got {sigma}")
    d = _wrapped_distance(np.asarray(tau, dtype=float), mu)
    # (d/sigma)^2 may overflow to inf for tiny sigma; exp(-inf) = 0 is the
    # intended limit, so the overflow warning is noise.
    with np.errstate(over="ignore"):
        return np.exp(-0.5 * (d / sigma) ** 2) / (math.sqrt(2.0 * math.pi) * sigma)


def circular_gaussian_target(mu: float, sigma: float, n: int) -> OrientationDistribution:
    """Ground-truth style target: wrapped Gaussian sampled at bin centers.

    The sampled densities are renormalized to sum to 1 so targets live on the
    same simplex as predicted distributions.  If sigma is so small that every
    sample underflows, all mass goes to the bin nearest mu.
    """
    if n < 2:
        raise ValueError(f"bin count must be >= 2, got {n}")
    vals = circular_gaussian_pdf(mu, sigma, bin_centers(n))
    total = vals.sum()
    if total == 0.0:
        vals = np.zeros(n)
        vals[int(np.argmin(_wrapped_distance(bin_centers(n), mu)))] = 1.0
        return OrientationDistribution(vals)
    return OrientationDistribution(vals / total)


def orientation_loss(
    predicted: OrientationDistribution, mu: float, sigma: float, n: int | None = None
) -> float:
    """Sum of squared differences between a prediction and the target at mu.

    ``n`` defaults to the prediction's own bin count; passing a different
    value is a contract error.
    """
    if n is not None and n != predicted.n:
        raise BinCountMismatch(f"prediction has {predicted.n} bins, target asked for {n}")
    target = circular_gaussian_target(mu, sigma, predicted.n)
    return float(np.sum((predicted.bins - target.bins) ** 2))


def decode_orientation(dist: OrientationDistribution) -> float:
    """Angle of the highest-probability bin, in degrees.

    Exact ties go to the lowest bin index.
    """
    return int(np.argmax(dist.bins)) * dist.bin_width


def _check_pairs(predictions: Sequence[float], truths: Sequence[float]) -> None:
    if len(predictions) != len(truths):
        raise LengthMismatch(f"{len(predictions)} predictions vs {len(truths)} truths")
    if len(predictions) == 0:
        raise EmptyInput("need at least one prediction/truth pair")


def ade(predictions: Sequence[float], truths: Sequence[float]) -> float:
    """Average degree error: mean wrapped angular error over pairs."""
    _check_pairs(predictions, truths)
    return float(np.mean(_wrapped_distance(np.asarray(predictions), np.asarray(truths))))


def acc_within(predictions: Sequence[float], truths: Sequence[float], threshold: float) -> float:
    """Fraction of pairs whose wrapped angular error is <= threshold degrees."""
    _check_pairs(predictions, truths)
    d = _wrapped_distance(np.asarray(predictions), np.asarray(truths))
    return float(np.mean(d <= threshold))
