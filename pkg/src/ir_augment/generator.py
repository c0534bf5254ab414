"""Threshold-free synthetic data generation for imbalanced regression.

Pipeline: score every instance by target rarity, resample the dataset by
those scores into a rare-dominated pool, optionally jitter the duplicated
draws, then regenerate the pool column by column with CART trees fitted on
the pool itself (each column predicted from all the others, target
included), sampling within the leaf each row lands in. The original rows are
kept; the regenerated pool rows are appended as synthetic data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._util import round_half_up
from .cart import CartParams, FeatureSchema, fit_tree, presort_features
from .relevance import build_relevance
from .tabular import ColumnKind, Dataset
from .weighting import SelectionWeights, WeightMethod, rarity_scores

SYNTH_PER_SEED = 5


@dataclass(frozen=True)
class CartGenParams:
    """Hyperparameters of the generator.

    alpha sharpens the rarity scores, eta sets the synthetic volume as a
    fraction of the original size, density picks the rarity mechanism, delta
    scales the Gaussian jitter applied to duplicated pool rows (as a fraction
    of each column's std).
    """

    alpha: float = 1.0
    eta: float = 0.5
    density: WeightMethod = WeightMethod.KDE
    delta: float = 0.0
    cart: CartParams = field(default_factory=CartParams)
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        object.__setattr__(self, "density", WeightMethod(self.density))


@dataclass(frozen=True)
class Pool:
    """Rows drawn from the source dataset, rarity-weighted, with repeat marks."""

    dataset: Dataset
    rows: np.ndarray
    duplicate_flags: np.ndarray
    source_indices: np.ndarray

    @property
    def size(self) -> int:
        return self.rows.shape[0]


@dataclass(frozen=True)
class AugmentedDataset:
    original: Dataset
    synthetic: np.ndarray
    combined: Dataset
    provenance: np.ndarray  # 'original' / 'synthetic' per combined row
    column_trees: tuple | None = None  # (column name, CartTree) pairs when kept


def resample_pool(ds: Dataset, weights: SelectionWeights, eta: float, rng: np.random.Generator) -> Pool:
    """Draw the generation pool: round(eta * n) rows.

    Seed instances are drawn with replacement by the selection probabilities,
    each contributing five pool rows; the tail is truncated (or the last seed
    extended) so the pool size law holds exactly. A row is flagged as a
    duplicate when its source index already occurred earlier in the pool.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    if weights.probs.shape[0] != ds.n:
        raise ValueError("weights are not aligned with the dataset")
    m = round_half_up(eta * ds.n)
    if m == 0:
        empty = np.empty((0, ds.p))
        return Pool(ds, empty, np.empty(0, dtype=bool), np.empty(0, dtype=np.intp))
    n_seeds = max(1, round_half_up(eta * ds.n / SYNTH_PER_SEED))
    seeds = rng.choice(ds.n, size=n_seeds, replace=True, p=weights.probs)
    source = np.repeat(seeds, SYNTH_PER_SEED)
    if source.shape[0] >= m:
        source = source[:m]
    else:
        source = np.concatenate([source, np.full(m - source.shape[0], seeds[-1])])
    flags = np.ones(m, dtype=bool)
    _, first_pos = np.unique(source, return_index=True)
    flags[first_pos] = False
    return Pool(ds, ds.X[source].copy(), flags, source.astype(np.intp))


def perturb_duplicates(pool: Pool, delta: float, stds: np.ndarray, rng: np.random.Generator) -> Pool:
    """Add N(0, (delta * std_col)^2) noise to the numeric cells of duplicated
    rows (target included); first occurrences and nominal cells stay put."""
    if delta < 0:
        raise ValueError("delta must be >= 0")
    dup = np.flatnonzero(pool.duplicate_flags)
    if delta == 0.0 or dup.size == 0:
        return pool
    numeric = pool.dataset.numeric_indices()
    rows = pool.rows.copy()
    noise = rng.standard_normal((dup.size, len(numeric))) * (delta * stds[numeric])
    rows[np.ix_(dup, numeric)] += noise
    return Pool(pool.dataset, rows, pool.duplicate_flags, pool.source_indices)


def fit_column_trees(pool: Pool, cart: CartParams, rng: np.random.Generator) -> list:
    """One tree per column, fitted on the pool with the other columns as
    predictors (target included). Returns (predictor columns, tree) pairs."""
    ds = pool.dataset
    p = pool.rows.shape[1]
    order = presort_features(pool.rows)  # shared across the per-column fits
    trees = []
    for j in range(p):
        others = [c for c in range(p) if c != j]
        schema = FeatureSchema(
            names=tuple(ds.names[c] for c in others),
            is_nominal=tuple(ds.kinds[c] is ColumnKind.NOMINAL for c in others),
            n_categories=tuple(len(ds.categories[c]) if ds.categories[c] else 0 for c in others),
        )
        nominal = ds.kinds[j] is ColumnKind.NOMINAL
        trees.append(
            (
                others,
                fit_tree(
                    pool.rows[:, others],
                    pool.rows[:, j],
                    schema,
                    cart,
                    rng,
                    target_nominal=nominal,
                    n_classes=len(ds.categories[j]) if nominal else 0,
                    presorted=order[others],
                ),
            )
        )
    return trees


def generate_from_trees(pool: Pool, trees: list, rng: np.random.Generator) -> np.ndarray:
    """One left-to-right generation pass over a working copy of the pool:
    each row is routed by its current cell values and the column is replaced
    by a draw from the reached leaf, so later columns condition on already-
    regenerated earlier ones."""
    work = pool.rows.copy()
    for j, (others, tree) in enumerate(trees):
        leaves = tree.leaf_of(work[:, others])
        work[:, j] = tree.sample_for_leaves(leaves, rng)
    return work


def synthesize(pool: Pool, cart: CartParams, rng: np.random.Generator) -> np.ndarray:
    """Regenerate the pool column-wise with per-column CART trees."""
    m, p = pool.rows.shape
    if m == 0:
        return np.empty((0, p))
    if p == 1:
        # no predictor columns: every tree degenerates to its root leaf
        draws = np.floor(rng.random(m) * m).astype(np.intp)
        return pool.rows[np.minimum(draws, m - 1)].copy()
    return generate_from_trees(pool, fit_column_trees(pool, cart, rng), rng)


def original_stds(ds: Dataset) -> np.ndarray:
    """Per-column population stds, zero for nominal columns."""
    stds = np.zeros(ds.p)
    for j in ds.numeric_indices():
        stds[j] = ds.column_std(j)
    return stds


def cartgen_ir(ds: Dataset, params: CartGenParams, keep_trees: bool = False) -> AugmentedDataset:
    """Run the full generation pipeline and append the synthetic rows."""
    rng = np.random.default_rng(params.seed)
    rel = build_relevance(ds.y) if params.density is WeightMethod.RELEVANCE else None
    weights = rarity_scores(ds.y, params.density, params.alpha, rel=rel)
    pool = resample_pool(ds, weights, params.eta, rng)
    pool = perturb_duplicates(pool, params.delta, original_stds(ds), rng)
    trees = None
    if pool.size == 0 or pool.rows.shape[1] == 1:
        synthetic = synthesize(pool, params.cart, rng)
    else:
        trees = fit_column_trees(pool, params.cart, rng)
        synthetic = generate_from_trees(pool, trees, rng)
    combined = ds.with_matrix(np.vstack([ds.X, synthetic]))
    provenance = np.array(["original"] * ds.n + ["synthetic"] * synthetic.shape[0])
    return AugmentedDataset(
        original=ds,
        synthetic=synthetic,
        combined=combined,
        provenance=provenance,
        column_trees=tuple((ds.names[j], t) for j, (_, t) in enumerate(trees)) if keep_trees and trees else None,
    )
