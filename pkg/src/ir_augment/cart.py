"""Binary CART induction whose leaves retain their training rows for sampling.

Regression targets split on sum-of-squared-error reduction, nominal targets
on Gini impurity reduction. Nominal predictors use the classic ordered-
category reduction (exhaustive subsets for small multiclass cases). Leaves
keep the indices of the training rows that reached them, so trees can both
predict and emit draws from the conditional distribution they estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _tree_kernels as _k
from .tabular import ColumnKind, Dataset

MAX_NOMINAL_CATEGORIES = 64


@dataclass(frozen=True)
class CartParams:
    """Stopping rules for tree induction."""

    min_leaf: int = 5
    min_split: int = 10
    max_depth: int | None = None

    def __post_init__(self):
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if self.min_split < 2 * self.min_leaf:
            raise ValueError("min_split must be >= 2 * min_leaf")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 or None")


@dataclass(frozen=True)
class FeatureSchema:
    """Names, kinds and category counts of the predictor columns."""

    names: tuple[str, ...]
    is_nominal: tuple[bool, ...]
    n_categories: tuple[int, ...]

    def __post_init__(self):
        for name, nominal, ncat in zip(self.names, self.is_nominal, self.n_categories):
            if nominal and ncat > MAX_NOMINAL_CATEGORIES:
                raise ValueError(
                    f"nominal feature {name!r} has {ncat} categories; "
                    f"at most {MAX_NOMINAL_CATEGORIES} are supported"
                )

    @property
    def p(self) -> int:
        return len(self.names)

    @classmethod
    def from_dataset(cls, ds: Dataset, exclude: int | None = None) -> "FeatureSchema":
        cols = [j for j in range(ds.p) if j != exclude]
        return cls(
            names=tuple(ds.names[j] for j in cols),
            is_nominal=tuple(ds.kinds[j] is ColumnKind.NOMINAL for j in cols),
            n_categories=tuple(len(ds.categories[j]) if ds.categories[j] else 0 for j in cols),
        )


class CartTree:
    """A fitted tree. Immutable; routing and sampling are reentrant."""

    def __init__(self, schema, params, target_nominal, n_classes, nodes, row_order, y):
        self.schema = schema
        self.params = params
        self.target_nominal = bool(target_nominal)
        self.n_classes = int(n_classes)
        (
            self._feature,
            self._thr,
            self._is_cat,
            self._lmask,
            self._rmask,
            self._left,
            self._right,
            self._node_n,
            self._start,
            self._end,
            self._depth,
            self._pred,
            self._gain,
        ) = nodes
        self._row_order = row_order
        self._y = y

    @property
    def node_count(self) -> int:
        return self._feature.shape[0]

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self._feature == _k.LEAF))

    @property
    def root_gain(self) -> float:
        """Gain of the root split (0 when the root is a leaf)."""
        return float(self._gain[0])

    def _as_matrix(self, rows) -> np.ndarray:
        X = np.ascontiguousarray(rows, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.schema.p:
            raise ValueError(f"expected {self.schema.p} feature columns, got {X.shape[1]}")
        return X

    def leaf_of(self, rows) -> np.ndarray:
        """Leaf node id for each row (single rows allowed)."""
        X = self._as_matrix(rows)
        return _k.route_rows(
            X, self._feature, self._thr, self._is_cat, self._lmask, self._rmask,
            self._left, self._right, self._node_n,
        )

    def predict(self, rows):
        """Leaf predictions: mean target, or the modal category code."""
        scalar = np.asarray(rows).ndim == 1
        out = self._pred[self.leaf_of(rows)]
        return float(out[0]) if scalar else out

    def leaf_rows(self, leaf_id: int) -> np.ndarray:
        """Training row indices that reached this leaf."""
        if self._feature[leaf_id] != _k.LEAF:
            raise ValueError(f"node {leaf_id} is not a leaf")
        return self._row_order[self._start[leaf_id]:self._end[leaf_id]]

    def sample_leaf(self, leaf_id: int, rng: np.random.Generator) -> float:
        """One value drawn uniformly with replacement from the leaf's training targets."""
        rows = self.leaf_rows(leaf_id)
        return float(self._y[rows[rng.integers(rows.shape[0])]])

    def sample_for_leaves(self, leaf_ids: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Vectorized sample_leaf, one independent draw per entry."""
        leaf_ids = np.asarray(leaf_ids, dtype=np.int64)
        sizes = (self._end[leaf_ids] - self._start[leaf_ids]).astype(np.float64)
        offsets = np.floor(rng.random(leaf_ids.shape[0]) * sizes).astype(np.int64)
        # guard the measure-zero u == 1.0 edge
        offsets = np.minimum(offsets, (sizes - 1).astype(np.int64))
        return self._y[self._row_order[self._start[leaf_ids] + offsets]]

    def to_dict(self, node: int = 0) -> dict:
        """Nested split/leaf records, for JSON dumps."""
        if self._feature[node] == _k.LEAF:
            value = self._pred[node]
            return {"leaf": {"n": int(self._node_n[node]), "prediction": float(value)}}
        f = int(self._feature[node])
        split: dict = {"feature": self.schema.names[f]}
        if self._is_cat[node]:
            mask = int(self._lmask[node])
            split["left_categories"] = [c for c in range(64) if (mask >> c) & 1]
        else:
            split["threshold"] = float(self._thr[node])
        return {
            "split": split,
            "gain": float(self._gain[node]),
            "left": self.to_dict(int(self._left[node])),
            "right": self.to_dict(int(self._right[node])),
        }


def presort_features(X: np.ndarray) -> np.ndarray:
    """Per-feature stable argsort of the rows, reusable across tree fits on
    the same matrix (fitting partitions a private copy in place)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    return np.vstack([np.argsort(X[:, f], kind="stable") for f in range(X.shape[1])])


def fit_tree(
    X,
    y,
    schema: FeatureSchema,
    params: CartParams = CartParams(),
    rng: np.random.Generator | None = None,
    target_nominal: bool = False,
    n_classes: int = 0,
    max_features: int | None = None,
    presorted: np.ndarray | None = None,
) -> CartTree:
    """Grow a tree greedily until no positive-gain split or a stopping rule fires.

    ``max_features`` limits how many features each node examines (a fresh
    random subset per node); the default examines all of them. ``presorted``
    feeds a precomputed ``presort_features(X)`` result to skip the sort.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n, p = X.shape
    if n < 1:
        raise ValueError("cannot fit a tree on an empty training set")
    if y.shape[0] != n:
        raise ValueError("features and target are not aligned")
    if p != schema.p:
        raise ValueError(f"schema declares {schema.p} features but X has {p}")
    if target_nominal and n_classes < 1:
        raise ValueError("a nominal target needs n_classes")
    rng = rng if rng is not None else np.random.default_rng()
    seed = np.uint64(rng.integers(0, 2**63 - 1, dtype=np.int64))
    m = p if max_features is None else max(1, min(int(max_features), p))
    max_depth = params.max_depth if params.max_depth is not None else _k.NO_DEPTH_LIMIT
    is_nom = np.array(schema.is_nominal, dtype=np.uint8)

    if p == 0:
        raise ValueError("at least one predictor column is required")
    sorted_idx = presort_features(X) if presorted is None else presorted.copy()

    out = _k.build_tree(
        X, y, is_nom,
        1 if target_nominal else 0,
        max(1, int(n_classes)),
        int(params.min_leaf),
        int(params.min_split),
        int(max_depth),
        int(m),
        seed,
        sorted_idx,
    )
    nodes, row_order = out[:-1], out[-1]
    return CartTree(schema, params, target_nominal, n_classes, nodes, row_order, y.copy())
