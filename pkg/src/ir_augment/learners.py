"""Predictive models used to score resampling strategies: CART and a bagged forest."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .cart import CartParams, CartTree, FeatureSchema, fit_tree


class MaxFeatures(Enum):
    SQRT = "sqrt"
    LOG2 = "log2"
    ALL = "all"


@dataclass(frozen=True)
class ForestParams:
    n_estimators: int = 100
    max_features: MaxFeatures = MaxFeatures.SQRT
    cart: CartParams = field(default_factory=CartParams)
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        object.__setattr__(self, "max_features", MaxFeatures(self.max_features))


def _features_per_node(mode: MaxFeatures, p: int) -> int:
    if mode is MaxFeatures.SQRT:
        return max(1, int(np.ceil(np.sqrt(p))))
    if mode is MaxFeatures.LOG2:
        return max(1, int(np.ceil(np.log2(p)))) if p > 1 else 1
    return p


class Forest:
    """Bagged CART regressors with per-node feature subsampling."""

    def __init__(self, trees: list[CartTree], params: ForestParams, schema: FeatureSchema):
        self.trees = trees
        self.params = params
        self.schema = schema

    def predict(self, rows):
        """Mean of the member trees' predictions."""
        scalar = np.asarray(rows).ndim == 1
        preds = np.mean([t.predict(np.atleast_2d(np.asarray(rows, dtype=np.float64))) for t in self.trees], axis=0)
        return float(preds[0]) if scalar else preds


def fit_forest(X, y, schema: FeatureSchema, params: ForestParams) -> Forest:
    """Fit ``n_estimators`` trees, each on a bootstrap resample of the rows
    (size n, with replacement) with a fresh random feature subset per node."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = X.shape[0]
    m = _features_per_node(params.max_features, schema.p)
    rng = np.random.default_rng(params.seed)
    trees = []
    for _ in range(params.n_estimators):
        if params.bootstrap:
            idx = rng.integers(0, n, size=n)
            Xb, yb = X[idx], y[idx]
        else:
            Xb, yb = X, y
        trees.append(fit_tree(Xb, yb, schema, params.cart, rng, max_features=m))
    return Forest(trees, params, schema)
