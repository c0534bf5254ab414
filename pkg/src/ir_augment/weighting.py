"""Per-instance rarity scores and selection probabilities for resampling.

Three mechanisms turn the target sample into selection probabilities: inverse
kernel density, density-based weighting with a rarity exponent cap, or the
relevance function itself. All of them yield strictly positive probabilities
that sum to one, so no instance is ever unselectable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from numba import config as _numba_config
from numba import njit, prange

from .relevance import RelevanceFunction

# The default TBB probe warns on this image's older TBB; OpenMP benches
# fastest of the remaining layers for these kernels.
_numba_config.THREADING_LAYER = "omp"

_EPS = 1e-6


class WeightMethod(Enum):
    KDE = "kde"
    DENSEWEIGHT = "denseweight"
    RELEVANCE = "relevance"


@dataclass(frozen=True)
class DensityEstimate:
    """Gaussian-kernel density evaluated at every sample point."""

    values: np.ndarray
    bandwidth: float


@dataclass(frozen=True)
class SelectionWeights:
    """Per-instance sampling probabilities (strictly positive, sum to 1)."""

    probs: np.ndarray
    method: WeightMethod
    alpha: float


# beyond this scaled distance exp underflows to exactly 0.0, so skipping the
# terms reproduces the full kernel sum bit-for-bit
_EXP_UNDERFLOW_CUT = 38.7


@njit(cache=True, parallel=True)
def _kde_eval(points: np.ndarray, y_sorted: np.ndarray, h: float) -> np.ndarray:
    n = y_sorted.shape[0]
    out = np.empty(points.shape[0], dtype=np.float64)
    norm = 1.0 / (n * h * math.sqrt(2.0 * math.pi))
    t = y_sorted / h
    for i in prange(points.shape[0]):
        ti = points[i] / h
        lo = np.searchsorted(t, ti - _EXP_UNDERFLOW_CUT)
        hi = np.searchsorted(t, ti + _EXP_UNDERFLOW_CUT)
        s = 0.0
        for j in range(lo, hi):
            d = ti - t[j]
            s += math.exp(-0.5 * d * d)
        out[i] = norm * s
    return out


def silverman_bandwidth(values: np.ndarray) -> float:
    """Silverman's rule of thumb: 0.9 min(std, IQR/1.34) n^(-1/5).

    Degenerate samples (zero spread) fall back to a tiny scale-aware width so
    the density stays finite and positive.
    """
    x = np.asarray(values, dtype=np.float64)
    q1, q3 = np.quantile(x, [0.25, 0.75])
    bw = 0.9 * min(float(np.std(x)), (q3 - q1) / 1.34) * x.size ** (-0.2)
    if bw <= 0.0:
        bw = _EPS * max(float(np.max(np.abs(x))), 1.0)
    return float(bw)


def kde(values: Sequence[float], bandwidth: float | None = None) -> DensityEstimate:
    """Gaussian-kernel density of the sample, evaluated at each sample point."""
    x = np.asarray(values, dtype=np.float64)
    if x.shape[0] < 2:
        raise ValueError(f"kde needs at least 2 values, got {x.shape[0]}")
    if bandwidth is None:
        if np.min(x) == np.max(x):
            raise ValueError("kde bandwidth cannot be inferred from identical values")
        bandwidth = silverman_bandwidth(x)
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    dens = _kde_eval(x, np.sort(x), float(bandwidth))
    return DensityEstimate(values=dens, bandwidth=float(bandwidth))


def kde_on_grid(values: Sequence[float], grid: Sequence[float], bandwidth: float | None = None) -> np.ndarray:
    """The same Gaussian-kernel density, evaluated at arbitrary points."""
    x = np.asarray(values, dtype=np.float64)
    g = np.asarray(grid, dtype=np.float64)
    if bandwidth is None:
        bandwidth = silverman_bandwidth(x)
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    return _kde_eval(g, np.sort(x), float(bandwidth))


def rarity_scores(
    values: Sequence[float],
    method: WeightMethod | str,
    alpha: float,
    rel: RelevanceFunction | None = None,
) -> SelectionWeights:
    """Selection probabilities from one of the three rarity mechanisms.

    kde: inverse density (plus a small relative constant) raised to alpha.
    denseweight: density rescaled to [0, 1], weights max(1 - alpha * p', eps)
    normalized to mean 1. relevance: (phi(y) + eps) ** alpha. Every variant is
    finally normalized to sum to 1.
    """
    method = WeightMethod(method)
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    x = np.asarray(values, dtype=np.float64)
    if method is WeightMethod.RELEVANCE:
        if rel is None:
            raise ValueError("the relevance method needs a built RelevanceFunction")
        raw = (rel(x) + _EPS) ** alpha
    elif method is WeightMethod.KDE:
        dens = kde(x).values
        raw = (1.0 / (dens + _EPS * dens.max())) ** alpha
    else:
        dens = kde(x).values
        spread = dens.max() - dens.min()
        if spread == 0.0:
            raw = np.ones_like(dens)
        else:
            scaled = (dens - dens.min()) / spread
            raw = np.maximum(1.0 - alpha * scaled, _EPS)
            raw = raw / raw.mean()
    probs = raw / raw.sum()
    return SelectionWeights(probs=probs, method=method, alpha=float(alpha))
