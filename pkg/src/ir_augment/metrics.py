"""Evaluation metrics: RMSE plus the two relevance-aware variants.

The relevance-weighted RMSE reweights squared errors by each instance's
relevance. The squared error-relevance area integrates, over relevance
cutoffs t in [0, 1], the SSE restricted to instances whose true target has
relevance at least t; both a fixed-step trapezoid estimate and an exact
breakpoint evaluator are provided.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroRelevanceMassError
from .relevance import RelevanceFunction


def _check_pair(y, yhat):
    y = np.asarray(y, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    if y.shape != yhat.shape or y.ndim != 1:
        raise ValueError(f"y and yhat must be equal-length 1-d arrays, got {y.shape} vs {yhat.shape}")
    if y.size == 0:
        raise ValueError("metrics need at least one pair")
    return y, yhat


def rmse(y, yhat) -> float:
    y, yhat = _check_pair(y, yhat)
    return float(np.sqrt(np.mean((y - yhat) ** 2)))


def rw_rmse(y, yhat, rel: RelevanceFunction) -> float:
    """sqrt( sum phi(y_i) (y_i - yhat_i)^2 / sum phi(y_i) )."""
    y, yhat = _check_pair(y, yhat)
    w = rel(y)
    total = w.sum()
    if total <= 0.0:
        raise ZeroRelevanceMassError("every instance has zero relevance")
    return float(np.sqrt(np.sum(w * (y - yhat) ** 2) / total))


@dataclass(frozen=True)
class SeraCurve:
    """ser(t) sampled on a uniform cutoff grid, plus its trapezoid area."""

    t_grid: np.ndarray
    ser_values: np.ndarray
    area: float


def _ser_inputs(y, yhat, rel):
    y, yhat = _check_pair(y, yhat)
    phi = rel(y)
    sq = (y - yhat) ** 2
    order = np.argsort(phi)
    return phi[order], np.concatenate([[0.0], np.cumsum(sq[order])])


def sera(y, yhat, rel: RelevanceFunction, step: float = 0.001) -> SeraCurve:
    """Trapezoid estimate of the error-relevance area on a uniform t grid."""
    n_steps = round(1.0 / step)
    if n_steps < 1 or abs(n_steps * step - 1.0) > 1e-9:
        raise ValueError(f"step {step} must divide 1 evenly")
    phi_sorted, cum = _ser_inputs(y, yhat, rel)
    total = cum[-1]
    t_grid = np.linspace(0.0, 1.0, n_steps + 1)
    # ser(t) = total squared error of instances with phi >= t
    pos = np.searchsorted(phi_sorted, t_grid, side="left")
    ser_values = total - cum[pos]
    area = float(np.trapezoid(ser_values, t_grid))
    return SeraCurve(t_grid=t_grid, ser_values=ser_values, area=area)


def sera_exact(y, yhat, rel: RelevanceFunction) -> float:
    """Exact area from the breakpoints of the step function ser(t).

    ser is constant between consecutive relevance values, so the integral is
    the sum of interval widths times the suffix squared-error sums.
    """
    phi_sorted, cum = _ser_inputs(y, yhat, rel)
    total = cum[-1]
    breakpoints = np.concatenate([[0.0], np.unique(phi_sorted)])
    area = 0.0
    for lo, hi in zip(breakpoints, breakpoints[1:]):
        # for t in (lo, hi]: phi_i >= t holds exactly when phi_i > lo
        pos = np.searchsorted(phi_sorted, lo, side="right")
        area += (hi - lo) * (total - cum[pos])
    return float(area)
