"""Automatic relevance of target values, built from adjusted boxplot statistics.

The relevance function maps target values to [0, 1]: 0 at the sample median,
rising to 1 at whichever skewness-adjusted whisker fences have observations
beyond them. Between control points it interpolates with a monotone cubic
Hermite (zero slope at every control point) and extrapolates as a constant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from .errors import NoRareRegionError


@njit(cache=True)
def _medcouple_h_values(lower: np.ndarray, upper: np.ndarray, m: float, n_ties: int) -> np.ndarray:
    """All kernel values h(x_i, x_j) over pairs x_i <= m <= x_j.

    ``lower`` holds the x_i <= m in ascending order (median ties last),
    ``upper`` the x_j >= m ascending (median ties first). Pairs tied at the
    median use the sign kernel over their anti-diagonal position.
    """
    nl = lower.shape[0]
    nu = upper.shape[0]
    h = np.empty(nl * nu, dtype=np.float64)
    pos = 0
    for i in range(nu):
        u = upper[i]
        for j in range(nl):
            low = lower[j]
            if u == m and low == m:
                d = i + (j - (nl - n_ties)) - (n_ties - 1)
                h[pos] = 0.0 if d == 0 else (1.0 if d > 0 else -1.0)
            else:
                h[pos] = ((u - m) - (m - low)) / (u - low)
            pos += 1
    return h


def medcouple(values: Sequence[float]) -> float:
    """Robust skewness statistic in [-1, 1].

    Median of h(x_i, x_j) = ((x_j - m) - (m - x_i)) / (x_j - x_i) over all
    pairs with x_i <= m <= x_j, where m is the sample median; pairs with both
    values equal to m use the standard sign kernel.
    """
    x = np.sort(np.asarray(values, dtype=np.float64))
    n = x.shape[0]
    if n < 3:
        raise ValueError(f"medcouple needs at least 3 values, got {n}")
    if x[0] == x[-1]:
        return 0.0
    m = float(np.median(x))
    lower = x[x <= m]
    upper = x[x >= m]
    n_ties = int(np.sum(x == m))
    h = _medcouple_h_values(lower, upper, m, n_ties)
    return float(np.median(h))


@dataclass(frozen=True)
class Fences:
    """Adjusted boxplot whisker fences with the statistics they derive from."""

    lower: float
    upper: float
    medcouple: float
    q1: float
    q3: float
    iqr: float


def adjusted_fences(values: Sequence[float]) -> Fences:
    """Skewness-adjusted whisker fences.

    With MC >= 0 the whiskers are [q1 - 1.5 e^(-4 MC) IQR, q3 + 1.5 e^(3 MC) IQR];
    for MC < 0 the exponents swap to (-3, 4). MC = 0 reduces to Tukey fences.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.shape[0] < 4:
        raise ValueError(f"adjusted fences need at least 4 values, got {x.shape[0]}")
    q1, q3 = (float(q) for q in np.quantile(x, [0.25, 0.75]))
    iqr = q3 - q1
    mc = medcouple(x)
    if mc >= 0:
        lower = q1 - 1.5 * np.exp(-4.0 * mc) * iqr
        upper = q3 + 1.5 * np.exp(3.0 * mc) * iqr
    else:
        lower = q1 - 1.5 * np.exp(-3.0 * mc) * iqr
        upper = q3 + 1.5 * np.exp(4.0 * mc) * iqr
    return Fences(lower=float(lower), upper=float(upper), medcouple=mc, q1=q1, q3=q3, iqr=iqr)


class RelevanceFunction:
    """Piecewise cubic Hermite interpolant over (y, relevance, slope) control points.

    Control-point ordinates must be strictly increasing and relevances lie in
    [0, 1]. Evaluation is clamped to [0, 1] and constant beyond the outermost
    control points, so the function is total on the real line.
    """

    def __init__(self, control_points: Sequence[tuple[float, float] | tuple[float, float, float]]):
        pts = [(float(cp[0]), float(cp[1]), float(cp[2]) if len(cp) > 2 else 0.0) for cp in control_points]
        if len(pts) < 2:
            raise ValueError("need at least 2 control points")
        ys = np.array([p[0] for p in pts])
        phis = np.array([p[1] for p in pts])
        slopes = np.array([p[2] for p in pts])
        if np.any(np.diff(ys) <= 0):
            raise ValueError("control-point y values must be strictly increasing")
        if np.any((phis < 0) | (phis > 1)):
            raise ValueError("control-point relevances must lie in [0, 1]")
        self._ys = ys
        self._phis = phis
        self._slopes = slopes

    @property
    def control_points(self) -> tuple[tuple[float, float, float], ...]:
        return tuple(zip(self._ys.tolist(), self._phis.tolist(), self._slopes.tolist()))

    def __call__(self, y):
        """Relevance of a target value (scalar in, float out; array in, array out)."""
        y_arr = np.atleast_1d(np.asarray(y, dtype=np.float64))
        ys, phis, slopes = self._ys, self._phis, self._slopes
        seg = np.clip(np.searchsorted(ys, y_arr, side="right") - 1, 0, len(ys) - 2)
        y0, y1 = ys[seg], ys[seg + 1]
        p0, p1 = phis[seg], phis[seg + 1]
        m0, m1 = slopes[seg], slopes[seg + 1]
        dx = y1 - y0
        t = np.clip((y_arr - y0) / dx, 0.0, 1.0)
        h10 = t * (1.0 - t) ** 2
        h11 = t * t * (t - 1.0)
        # written as an offset from p0 so constant segments evaluate exactly
        out = p0 + (p1 - p0) * (t * t * (3.0 - 2.0 * t)) + dx * (m0 * h10 + m1 * h11)
        out[y_arr <= ys[0]] = phis[0]
        out[y_arr >= ys[-1]] = phis[-1]
        out = np.clip(out, 0.0, 1.0)
        if np.isscalar(y) or np.asarray(y).ndim == 0:
            return float(out[0])
        return out

    def to_dict(self) -> dict:
        return {
            "control_points": [
                {"y": y, "relevance": p, "slope": s} for y, p, s in self.control_points
            ]
        }


def build_relevance(values: Sequence[float]) -> RelevanceFunction:
    """Build the automatic relevance function from a target sample.

    Control points are (lower fence, 1), (median, 0), (upper fence, 1); a
    fence is kept only if at least one observation lies strictly beyond it,
    so one-tailed samples get a one-sided function. With no observation
    beyond either fence there is no rare region and the build fails.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.shape[0] < 4:
        raise ValueError(f"relevance build needs at least 4 values, got {x.shape[0]}")
    fences = adjusted_fences(x)
    median = float(np.median(x))
    points: list[tuple[float, float]] = []
    if np.any(x < fences.lower):
        points.append((fences.lower, 1.0))
    points.append((median, 0.0))
    if np.any(x > fences.upper):
        points.append((fences.upper, 1.0))
    if len(points) < 2:
        raise NoRareRegionError(
            "no observations beyond the adjusted fences "
            f"[{fences.lower:g}, {fences.upper:g}]; every target value is common"
        )
    return RelevanceFunction(points)


def rare_count(rel: RelevanceFunction, values: Sequence[float], threshold: float) -> tuple[int, float]:
    """How many values have relevance >= threshold, as (count, fraction)."""
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        return 0, 0.0
    count = int(np.sum(rel(x) >= threshold))
    return count, count / x.size
