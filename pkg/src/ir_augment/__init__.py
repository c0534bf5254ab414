"""Rarity-weighted synthetic data generation and resampling for imbalanced regression."""

__version__ = "0.1.0"

from .tabular import ColumnKind, ColumnSummary, Dataset, column_summary, load_arff, load_csv, load_table, write_csv
from .relevance import Fences, RelevanceFunction, adjusted_fences, build_relevance, medcouple, rare_count
from .weighting import DensityEstimate, SelectionWeights, WeightMethod, kde, rarity_scores, silverman_bandwidth
from .cart import CartParams, CartTree, FeatureSchema, fit_tree
from .generator import AugmentedDataset, CartGenParams, Pool, cartgen_ir, perturb_duplicates, resample_pool, synthesize
from .baselines import BaselineConfig, PartitionMode, Strategy, gn, partition, random_over, random_under, smogn, smoter, wercs
from .metrics import SeraCurve, rmse, rw_rmse, sera, sera_exact
from .learners import Forest, ForestParams, MaxFeatures, fit_forest
from .harness import (
    EvalRecord,
    FoldPlan,
    LearnerSpec,
    RunManifest,
    StrategySpec,
    TestResult,
    make_plan,
    run_benchmark,
    run_experiment,
    wilcoxon,
    wins_losses,
)

__all__ = [
    "ColumnKind",
    "ColumnSummary",
    "Dataset",
    "column_summary",
    "load_arff",
    "load_csv",
    "load_table",
    "write_csv",
    "Fences",
    "RelevanceFunction",
    "adjusted_fences",
    "build_relevance",
    "medcouple",
    "rare_count",
    "DensityEstimate",
    "SelectionWeights",
    "WeightMethod",
    "kde",
    "rarity_scores",
    "silverman_bandwidth",
    "CartParams",
    "CartTree",
    "FeatureSchema",
    "fit_tree",
    "AugmentedDataset",
    "CartGenParams",
    "Pool",
    "cartgen_ir",
    "perturb_duplicates",
    "resample_pool",
    "synthesize",
    "BaselineConfig",
    "PartitionMode",
    "Strategy",
    "gn",
    "partition",
    "random_over",
    "random_under",
    "smogn",
    "smoter",
    "wercs",
    "SeraCurve",
    "rmse",
    "rw_rmse",
    "sera",
    "sera_exact",
    "Forest",
    "ForestParams",
    "MaxFeatures",
    "fit_forest",
    "EvalRecord",
    "FoldPlan",
    "LearnerSpec",
    "RunManifest",
    "StrategySpec",
    "TestResult",
    "make_plan",
    "run_benchmark",
    "run_experiment",
    "wilcoxon",
    "wins_losses",
]
