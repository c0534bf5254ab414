"""Classical data-level strategies for imbalanced regression.

All of them split the data at a relevance threshold into rare and normal
partitions (except the combined weighted strategy, which is threshold-free)
and resize the partitions according to a mode: balance equalizes against the
other partition's size, extreme inverts the ratio between them.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._util import round_half_up
from .errors import EmptyRarePartitionError, ZeroRelevanceMassError
from .relevance import RelevanceFunction
from .tabular import ColumnKind, Dataset

DEFAULT_THRESHOLD = 0.8


class PartitionMode(Enum):
    BALANCE = "balance"
    EXTREME = "extreme"


class Strategy(Enum):
    RU = "ru"
    RO = "ro"
    WERCS = "wercs"
    GN = "gn"
    SMOTER = "smoter"
    SMOGN = "smogn"


@dataclass(frozen=True)
class BaselineConfig:
    """One strategy with its hyperparameters (unused fields are ignored)."""

    strategy: Strategy
    mode: PartitionMode = PartitionMode.BALANCE
    po: float = 0.5
    pu: float = 0.5
    delta: float = 0.05
    k: int = 5
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        object.__setattr__(self, "mode", PartitionMode(self.mode))
        if not (0.0 <= self.po <= 1.0 and 0.0 <= self.pu <= 1.0):
            raise ValueError("po and pu must lie in [0, 1]")
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if self.k < 1:
            raise ValueError("k must be >= 1")

    def apply(self, ds: Dataset, rel: RelevanceFunction, rng: np.random.Generator) -> Dataset:
        s = self.strategy
        if s is Strategy.RU:
            return random_under(ds, rel, self.mode, rng, self.threshold)
        if s is Strategy.RO:
            return random_over(ds, rel, self.mode, rng, self.threshold)
        if s is Strategy.WERCS:
            return wercs(ds, rel, self.po, self.pu, rng)
        if s is Strategy.GN:
            return gn(ds, rel, self.mode, self.delta, rng, self.threshold)
        if s is Strategy.SMOTER:
            return smoter(ds, rel, self.mode, self.k, rng, self.threshold)
        return smogn(ds, rel, self.mode, self.delta, self.k, rng, self.threshold)


def partition(ds: Dataset, rel: RelevanceFunction, threshold: float) -> tuple[np.ndarray, np.ndarray]:
    """Row indices of the (rare, normal) partitions: rare means phi(y) >= threshold."""
    phi = rel(ds.y)
    rare = np.flatnonzero(phi >= threshold)
    normal = np.flatnonzero(phi < threshold)
    if rare.size == 0:
        raise EmptyRarePartitionError(f"no instances with relevance >= {threshold}")
    return rare, normal


def _require_normal(normal: np.ndarray):
    if normal.size == 0:
        raise EmptyRarePartitionError("the normal partition is empty; nothing to resample against")


def _under_size(n_rare: int, n_normal: int, mode: PartitionMode) -> int:
    if mode is PartitionMode.BALANCE:
        return min(n_rare, n_normal)
    return min(round_half_up(n_rare**2 / n_normal), n_normal)


def _over_size(n_rare: int, n_normal: int, mode: PartitionMode) -> int:
    if mode is PartitionMode.BALANCE:
        return max(n_normal, n_rare)
    return max(round_half_up(n_normal**2 / n_rare), n_rare)


def random_under(
    ds: Dataset, rel: RelevanceFunction, mode: PartitionMode, rng: np.random.Generator,
    threshold: float = DEFAULT_THRESHOLD,
) -> Dataset:
    """Keep every rare row; subsample the normal rows without replacement."""
    rare, normal = partition(ds, rel, threshold)
    _require_normal(normal)
    keep_n = _under_size(rare.size, normal.size, mode)
    kept = rng.choice(normal, size=keep_n, replace=False) if keep_n < normal.size else normal
    return ds.row_subset(np.sort(np.concatenate([rare, kept])))


def random_over(
    ds: Dataset, rel: RelevanceFunction, mode: PartitionMode, rng: np.random.Generator,
    threshold: float = DEFAULT_THRESHOLD,
) -> Dataset:
    """Keep every row; duplicate rare rows with replacement up to the mode size."""
    rare, normal = partition(ds, rel, threshold)
    _require_normal(normal)
    extra = _over_size(rare.size, normal.size, mode) - rare.size
    dup = rng.choice(rare, size=extra, replace=True) if extra > 0 else np.empty(0, dtype=np.intp)
    return ds.row_subset(np.concatenate([np.arange(ds.n), dup]))


def wercs(
    ds: Dataset, rel: RelevanceFunction, po: float, pu: float, rng: np.random.Generator,
) -> Dataset:
    """Threshold-free combined over/undersampling.

    Adds round(po * n) rows drawn with replacement with probability
    proportional to phi(y), then removes round(pu * n) of the original rows
    (capped at n - 1) drawn without replacement proportionally to 1 - phi(y).
    """
    if not (0.0 <= po <= 1.0 and 0.0 <= pu <= 1.0):
        raise ValueError("po and pu must lie in [0, 1]")
    phi = rel(ds.y)
    n_add = round_half_up(po * ds.n)
    n_remove = min(round_half_up(pu * ds.n), ds.n - 1)
    added = np.empty(0, dtype=np.intp)
    if n_add > 0:
        if phi.sum() <= 0:
            raise ZeroRelevanceMassError("cannot oversample: all relevances are zero")
        added = rng.choice(ds.n, size=n_add, replace=True, p=phi / phi.sum())
    keep = np.arange(ds.n)
    if n_remove > 0:
        anti = 1.0 - phi
        if anti.sum() <= 0:
            raise ZeroRelevanceMassError("cannot undersample: all relevances are one")
        # rows with relevance exactly 1 have zero removal probability and can
        # never be drawn, so the removal count caps at the removable rows
        n_remove = min(n_remove, int(np.count_nonzero(anti)))
        removed = rng.choice(ds.n, size=n_remove, replace=False, p=anti / anti.sum())
        keep = np.setdiff1d(keep, removed)
    return ds.row_subset(np.concatenate([keep, added]))


def _noisy_copies(
    ds: Dataset, seeds: np.ndarray, per_col_sd: np.ndarray, nominal_resample_p: float,
    nominal_pool: np.ndarray, rng: np.random.Generator,
) -> np.ndarray:
    """Seed rows plus Gaussian noise on numeric cells; nominal cells are
    resampled from the pool's empirical distribution with given probability."""
    rows = ds.X[seeds].copy()
    for j in range(ds.p):
        if ds.kinds[j] is ColumnKind.NUMERIC:
            if per_col_sd[j] > 0:
                rows[:, j] += rng.normal(0.0, per_col_sd[j], size=rows.shape[0])
        elif nominal_resample_p > 0 and nominal_pool.size:
            swap = rng.random(rows.shape[0]) < nominal_resample_p
            if swap.any():
                rows[swap, j] = rng.choice(nominal_pool[:, j], size=int(swap.sum()), replace=True)
    return rows


def gn(
    ds: Dataset, rel: RelevanceFunction, mode: PartitionMode, delta: float,
    rng: np.random.Generator, threshold: float = DEFAULT_THRESHOLD,
) -> Dataset:
    """Undersample the normal partition and oversample the rare one with
    jittered copies: numeric cells get N(0, (delta * column std)^2) noise,
    nominal cells are resampled from the rare partition with probability delta."""
    rare, normal = partition(ds, rel, threshold)
    _require_normal(normal)
    keep_n = _under_size(rare.size, normal.size, mode)
    kept = rng.choice(normal, size=keep_n, replace=False) if keep_n < normal.size else normal
    n_synth = _over_size(rare.size, normal.size, mode) - rare.size
    base = ds.row_subset(np.sort(np.concatenate([rare, kept])))
    if n_synth <= 0:
        return base
    seeds = rng.choice(rare, size=n_synth, replace=True)
    per_col_sd = np.array(
        [delta * ds.column_std(j) if ds.kinds[j] is ColumnKind.NUMERIC else 0.0 for j in range(ds.p)]
    )
    synth = _noisy_copies(ds, seeds, per_col_sd, delta, ds.X[rare], rng)
    return ds.with_matrix(np.vstack([base.X, synth]))


def _heom_space(ds: Dataset, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Feature matrix of the given rows plus per-feature scale factors.

    Numeric features are compared as |a - b| / range (range over these rows),
    nominal features as 0/1 mismatch; the target column is excluded.
    """
    cols = [j for j in range(ds.p) if j != ds.target_index]
    F = ds.X[np.ix_(rows, cols)]
    inv_range = np.zeros(len(cols))
    nominal = np.zeros(len(cols), dtype=bool)
    for i, j in enumerate(cols):
        if ds.kinds[j] is ColumnKind.NOMINAL:
            nominal[i] = True
        else:
            spread = F[:, i].max() - F[:, i].min()
            inv_range[i] = 1.0 / spread if spread > 0 else 0.0
    return F, np.where(nominal, np.nan, inv_range)


def _heom(a: np.ndarray, b: np.ndarray, inv_range: np.ndarray) -> float:
    nominal = np.isnan(inv_range)
    d2 = 0.0
    num = ~nominal
    diffs = (a[num] - b[num]) * inv_range[num]
    d2 += float(np.sum(diffs * diffs))
    d2 += float(np.sum(a[nominal] != b[nominal]))
    return float(np.sqrt(d2))


def _rare_neighbors(F: np.ndarray, inv_range: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """k nearest neighbors of each rare row among the rare rows (HEOM)."""
    r = F.shape[0]
    nominal = np.isnan(inv_range)
    scaled = np.where(nominal, 0.0, inv_range) * F
    k = min(k, r - 1)
    nn_idx = np.empty((r, k), dtype=np.intp)
    nn_dist = np.empty((r, k))
    for i in range(r):
        d2 = np.sum((scaled[i] - scaled) ** 2, axis=1)
        if nominal.any():
            d2 += np.sum(F[i, nominal] != F[:, nominal], axis=1)
        d2[i] = np.inf
        order = np.argsort(d2, kind="stable")[:k]
        nn_idx[i] = order
        nn_dist[i] = np.sqrt(d2[order])
    return nn_idx, nn_dist


def _interpolate_case(
    ds: Dataset, F: np.ndarray, inv_range: np.ndarray, rare: np.ndarray,
    seed_pos: int, nb_pos: int, rng: np.random.Generator,
) -> np.ndarray:
    """One synthetic case on the seed-neighbor segment; the target is the
    inverse-distance weighted mean of the pair's targets."""
    cols = [j for j in range(ds.p) if j != ds.target_index]
    seed_row = ds.X[rare[seed_pos]].copy()
    nb_row = ds.X[rare[nb_pos]]
    u = rng.random()
    new = seed_row.copy()
    for i, j in enumerate(cols):
        if np.isnan(inv_range[i]):
            if rng.random() < 0.5:
                new[j] = nb_row[j]
        else:
            new[j] = seed_row[j] + u * (nb_row[j] - seed_row[j])
    feats = np.array([new[j] for j in cols])
    d_seed = _heom(feats, F[seed_pos], inv_range)
    d_nb = _heom(feats, F[nb_pos], inv_range)
    y_seed = ds.X[rare[seed_pos], ds.target_index]
    y_nb = ds.X[rare[nb_pos], ds.target_index]
    if d_seed + d_nb == 0.0:
        new[ds.target_index] = 0.5 * (y_seed + y_nb)
    else:
        new[ds.target_index] = (d_nb * y_seed + d_seed * y_nb) / (d_seed + d_nb)
    return new


def smoter(
    ds: Dataset, rel: RelevanceFunction, mode: PartitionMode, k: int,
    rng: np.random.Generator, threshold: float = DEFAULT_THRESHOLD,
) -> Dataset:
    """Undersample the normal partition; grow the rare one with synthetic
    cases interpolated between rare seeds and their rare nearest neighbors."""
    rare, normal = partition(ds, rel, threshold)
    _require_normal(normal)
    if rare.size < 2:
        raise EmptyRarePartitionError("need at least 2 rare rows to interpolate")
    keep_n = _under_size(rare.size, normal.size, mode)
    kept = rng.choice(normal, size=keep_n, replace=False) if keep_n < normal.size else normal
    n_synth = _over_size(rare.size, normal.size, mode) - rare.size
    base = ds.row_subset(np.sort(np.concatenate([rare, kept])))
    if n_synth <= 0:
        return base
    F, inv_range = _heom_space(ds, rare)
    nn_idx, _ = _rare_neighbors(F, inv_range, k)
    seeds = rng.integers(0, rare.size, size=n_synth)
    picks = rng.integers(0, nn_idx.shape[1], size=n_synth)
    synth = np.empty((n_synth, ds.p))
    for s in range(n_synth):
        synth[s] = _interpolate_case(ds, F, inv_range, rare, int(seeds[s]), int(nn_idx[seeds[s], picks[s]]), rng)
    return ds.with_matrix(np.vstack([base.X, synth]))


def smogn(
    ds: Dataset, rel: RelevanceFunction, mode: PartitionMode, delta: float, k: int,
    rng: np.random.Generator, threshold: float = DEFAULT_THRESHOLD,
) -> Dataset:
    """Interpolate when the chosen neighbor is close (within half the median
    distance of the seed's k neighbors), otherwise jitter the seed with
    Gaussian noise capped by that same distance budget."""
    rare, normal = partition(ds, rel, threshold)
    _require_normal(normal)
    if rare.size < 2:
        raise EmptyRarePartitionError("need at least 2 rare rows to interpolate")
    keep_n = _under_size(rare.size, normal.size, mode)
    kept = rng.choice(normal, size=keep_n, replace=False) if keep_n < normal.size else normal
    n_synth = _over_size(rare.size, normal.size, mode) - rare.size
    base = ds.row_subset(np.sort(np.concatenate([rare, kept])))
    if n_synth <= 0:
        return base
    F, inv_range = _heom_space(ds, rare)
    nn_idx, nn_dist = _rare_neighbors(F, inv_range, k)
    half_median = 0.5 * np.median(nn_dist, axis=1)
    stds = np.array(
        [ds.column_std(j) if ds.kinds[j] is ColumnKind.NUMERIC else 0.0 for j in range(ds.p)]
    )
    seeds = rng.integers(0, rare.size, size=n_synth)
    picks = rng.integers(0, nn_idx.shape[1], size=n_synth)
    synth = np.empty((n_synth, ds.p))
    for s in range(n_synth):
        seed_pos = int(seeds[s])
        nb_pos = int(nn_idx[seed_pos, picks[s]])
        if nn_dist[seed_pos, picks[s]] <= half_median[seed_pos]:
            synth[s] = _interpolate_case(ds, F, inv_range, rare, seed_pos, nb_pos, rng)
        else:
            pert = min(delta, float(half_median[seed_pos]))
            synth[s] = _noisy_copies(
                ds, rare[[seed_pos]], pert * stds, delta, ds.X[rare], rng
            )[0]
    return ds.with_matrix(np.vstack([base.X, synth]))
