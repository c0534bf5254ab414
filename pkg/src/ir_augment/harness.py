"""Repeated k-fold benchmark harness with paired significance testing.

Resampling strategies are applied to training folds only; the relevance
function used both for strategy thresholds and for the relevance-aware
metrics is rebuilt on each training fold, so no test information leaks into
resampling or evaluation. Runtimes are recorded separately from metric
records so record files are byte-reproducible across runs.
"""

from __future__ import annotations

import csv
import json
import math
import multiprocessing
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from ._util import round_half_up, stable_key_hash
from .baselines import BaselineConfig, PartitionMode, Strategy
from .cart import CartParams, FeatureSchema, fit_tree
from .errors import EmptyRarePartitionError, IrAugmentError, ManifestError, NoRareRegionError, ZeroRelevanceMassError
from .generator import CartGenParams, cartgen_ir
from .learners import ForestParams, fit_forest
from .metrics import rmse, rw_rmse, sera
from .relevance import build_relevance
from .tabular import Dataset, load_table


# --------------------------------------------------------------------------
# fold plans

@dataclass(frozen=True)
class FoldPlan:
    """Per-repeat assignment of every row to exactly one test fold."""

    repeats: int
    folds: int
    assignments: np.ndarray  # (repeats, n) fold labels
    seed: int

    def test_rows(self, repeat: int, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments[repeat] == fold)

    def train_rows(self, repeat: int, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments[repeat] != fold)


def make_plan(n: int, repeats: int = 2, folds: int = 5, seed: int = 0) -> FoldPlan:
    """Shuffle rows into folds whose sizes differ by at most one."""
    if folds < 2 or folds > n:
        raise ValueError(f"folds must lie in [2, n]; got folds={folds}, n={n}")
    rng = np.random.default_rng(seed)
    assignments = np.empty((repeats, n), dtype=np.int64)
    sizes = [n // folds + (1 if i < n % folds else 0) for i in range(folds)]
    labels = np.repeat(np.arange(folds), sizes)
    for r in range(repeats):
        assignments[r] = labels[np.argsort(rng.permutation(n), kind="stable")]
    return FoldPlan(repeats=repeats, folds=folds, assignments=assignments, seed=seed)


# --------------------------------------------------------------------------
# strategy / learner specs

STRATEGY_NONE = "none"
STRATEGY_CARTGEN = "cartgen-ir"
BASELINE_NAMES = tuple(s.value for s in Strategy)


@dataclass(frozen=True)
class StrategySpec:
    """A named resampling strategy plus its hyperparameters."""

    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in (STRATEGY_NONE, STRATEGY_CARTGEN) + BASELINE_NAMES:
            raise ValueError(f"unknown strategy {self.name!r}")

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        inner = ",".join(f"{k}={self.params[k]}" for k in sorted(self.params))
        return f"{self.name}({inner})"

    def resample(self, ds: Dataset, rel, seed: int) -> Dataset:
        if self.name == STRATEGY_NONE:
            return ds
        if self.name == STRATEGY_CARTGEN:
            cart_keys = {"min_leaf", "min_split", "max_depth"}
            cart = CartParams(**{k: v for k, v in self.params.items() if k in cart_keys})
            gen_params = {k: v for k, v in self.params.items() if k not in cart_keys}
            return cartgen_ir(ds, CartGenParams(cart=cart, seed=seed, **gen_params)).combined
        cfg = BaselineConfig(strategy=Strategy(self.name), **self.params)
        return cfg.apply(ds, rel, np.random.default_rng(np.random.SeedSequence(seed)))


@dataclass(frozen=True)
class LearnerSpec:
    """A predictive model family plus its hyperparameters."""

    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in ("rf", "cart"):
            raise ValueError(f"unknown learner {self.name!r}")

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        inner = ",".join(f"{k}={self.params[k]}" for k in sorted(self.params))
        return f"{self.name}({inner})"

    def fit(self, X: np.ndarray, y: np.ndarray, schema: FeatureSchema, seed: int):
        if self.name == "rf":
            params = ForestParams(seed=seed, **self.params)
            return fit_forest(X, y, schema, params)
        cart = CartParams(**self.params)
        return fit_tree(X, y, schema, cart, np.random.default_rng(np.random.SeedSequence(seed)))


# --------------------------------------------------------------------------
# records

RECORD_FIELDS = ("dataset", "strategy", "learner", "repeat", "fold", "status", "reason",
                 "rmse", "rw_rmse", "sera")
RUNTIME_FIELDS = ("dataset", "strategy", "learner", "repeat", "fold",
                  "resample_runtime_s", "fit_runtime_s")
METRICS = ("rmse", "rw_rmse", "sera")


@dataclass
class EvalRecord:
    """One (dataset, strategy, learner, repeat, fold) evaluation result."""

    dataset: str
    strategy: str
    learner: str
    repeat: int
    fold: int
    status: str = "ok"
    reason: str = ""
    rmse: float = math.nan
    rw_rmse: float = math.nan
    sera: float = math.nan
    resample_runtime_s: float = 0.0
    fit_runtime_s: float = 0.0

    def key(self):
        return (self.dataset, self.strategy, self.learner, self.repeat, self.fold)


def run_experiment(
    ds: Dataset,
    strategy: StrategySpec,
    learner: LearnerSpec,
    plan: FoldPlan,
    dataset_name: str = "dataset",
    seed: int = 0,
) -> list[EvalRecord]:
    """Evaluate one strategy x learner combination over every (repeat, fold).

    The learner RNG seed is derived without the strategy name, so strategies
    that leave the training fold untouched produce identical records to the
    no-resampling baseline. Strategy failures on a fold (for example an empty
    rare partition) yield a skipped record carrying the reason.
    """
    records = []
    for repeat in range(plan.repeats):
        for fold in range(plan.folds):
            rec = EvalRecord(dataset_name, strategy.label, learner.label, repeat, fold)
            train = plan.train_rows(repeat, fold)
            test = plan.test_rows(repeat, fold)
            assert np.intersect1d(train, test).size == 0, "fold plan leaked test rows"
            train_ds = ds.row_subset(train)
            test_ds = ds.row_subset(test)
            try:
                rel = build_relevance(train_ds.y)
            except (NoRareRegionError, ValueError) as exc:
                records.append(replace(rec, status="skipped", reason=f"relevance: {exc}"))
                continue
            strat_seed = stable_key_hash(seed, "strategy", dataset_name, strategy.label, repeat, fold)
            t0 = time.perf_counter()
            try:
                fitted_ds = strategy.resample(train_ds, rel, strat_seed)
            except IrAugmentError as exc:
                records.append(replace(rec, status="skipped", reason=f"{strategy.name}: {exc}"))
                continue
            rec.resample_runtime_s = time.perf_counter() - t0 if strategy.name != STRATEGY_NONE else 0.0

            schema = FeatureSchema.from_dataset(ds, exclude=ds.target_index)
            cols = [j for j in range(ds.p) if j != ds.target_index]
            learn_seed = stable_key_hash(seed, "learner", dataset_name, learner.label, repeat, fold)
            t0 = time.perf_counter()
            model = learner.fit(fitted_ds.X[:, cols], fitted_ds.y, schema, learn_seed)
            rec.fit_runtime_s = time.perf_counter() - t0

            yhat = model.predict(test_ds.X[:, cols])
            y = test_ds.y
            rec.rmse = rmse(y, yhat)
            try:
                rec.rw_rmse = rw_rmse(y, yhat, rel)
            except ZeroRelevanceMassError:
                rec.rw_rmse = math.nan
            rec.sera = sera(y, yhat, rel).area
            records.append(rec)
    return records


# --------------------------------------------------------------------------
# Wilcoxon signed rank

@dataclass(frozen=True)
class TestResult:
    statistic: float  # sum of ranks of the positive differences
    p_value: float
    n_effective: int


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0])
    i = 0
    while i < values.shape[0]:
        j = i
        while j + 1 < values.shape[0] and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _exact_signed_rank_p(doubled_ranks: np.ndarray, w_plus_doubled: int, alternative: str) -> float:
    """Exact tail probabilities of W+ over all 2^n sign patterns, via counting."""
    total = int(doubled_ranks.sum())
    counts = np.zeros(total + 1)
    counts[0] = 1.0
    for r in doubled_ranks:
        r = int(r)
        counts[r:] += counts[:counts.shape[0] - r].copy()
    denom = 2.0 ** doubled_ranks.shape[0]
    p_le = counts[: w_plus_doubled + 1].sum() / denom
    p_ge = counts[w_plus_doubled:].sum() / denom
    if alternative == "greater":
        return min(1.0, p_ge)
    if alternative == "less":
        return min(1.0, p_le)
    return min(1.0, 2.0 * min(p_le, p_ge))


def wilcoxon(a: Sequence[float], b: Sequence[float], alternative: str = "two-sided") -> TestResult:
    """Paired signed-rank test of a vs b.

    Zero differences are dropped; tied absolute differences share average
    ranks. The null distribution is exact (full sign-pattern enumeration) for
    up to 25 effective pairs, and a normal approximation with tie and
    continuity corrections beyond that.
    """
    if alternative not in ("two-sided", "greater", "less"):
        raise ValueError(f"unknown alternative {alternative!r}")
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size == 0:
        raise ValueError("a and b must be equal-length non-empty 1-d sequences")
    d = a - b
    d = d[d != 0.0]
    n = d.shape[0]
    if n == 0:
        return TestResult(statistic=0.0, p_value=1.0, n_effective=0)
    ranks = _average_ranks(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    if n <= 25:
        doubled = np.rint(2.0 * ranks).astype(np.int64)
        w2 = int(round(2.0 * w_plus))
        p = _exact_signed_rank_p(doubled, w2, alternative)
        return TestResult(statistic=w_plus, p_value=p, n_effective=n)
    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(tie_counts**3 - tie_counts)) / 48.0
    sd = math.sqrt(var)

    def upper_tail(w):  # P(W+ >= w) with continuity correction
        return 0.5 * math.erfc((w - 0.5 - mean) / (sd * math.sqrt(2.0)))

    def lower_tail(w):  # P(W+ <= w)
        return 0.5 * math.erfc((mean - w - 0.5) / (sd * math.sqrt(2.0)))

    if alternative == "greater":
        p = upper_tail(w_plus)
    elif alternative == "less":
        p = lower_tail(w_plus)
    else:
        p = min(1.0, 2.0 * min(upper_tail(w_plus), lower_tail(w_plus)))
    return TestResult(statistic=w_plus, p_value=min(1.0, p), n_effective=n)


# --------------------------------------------------------------------------
# wins / losses

@dataclass(frozen=True)
class SummaryRow:
    strategy: str
    learner: str
    metric: str
    wins: int
    losses: int
    significant_wins: int
    significant_losses: int
    datasets: int


def wins_losses(records: Sequence[EvalRecord], baseline: str = STRATEGY_NONE,
                alpha_sig: float = 0.05) -> list[SummaryRow]:
    """Per strategy x learner x metric: datasets where the fold-mean beats /
    trails the baseline (lower is better), with fold-paired significance."""
    ok = [r for r in records if r.status == "ok"]
    by_cell: dict = {}
    for r in ok:
        by_cell.setdefault((r.dataset, r.strategy, r.learner), {})[(r.repeat, r.fold)] = r
    strategies = sorted({r.strategy for r in ok if r.strategy != baseline})
    learners = sorted({r.learner for r in ok})
    datasets = sorted({r.dataset for r in ok})
    rows = []
    for strategy in strategies:
        for learner in learners:
            for metric in METRICS:
                wins = losses = sig_wins = sig_losses = compared = 0
                for dataset in datasets:
                    cell = by_cell.get((dataset, strategy, learner), {})
                    base = by_cell.get((dataset, baseline, learner), {})
                    folds = sorted(set(cell) & set(base))
                    scores = np.array([getattr(cell[f], metric) for f in folds])
                    base_scores = np.array([getattr(base[f], metric) for f in folds])
                    keep = np.isfinite(scores) & np.isfinite(base_scores)
                    if keep.sum() == 0:
                        continue
                    scores, base_scores = scores[keep], base_scores[keep]
                    compared += 1
                    significant = wilcoxon(scores, base_scores).p_value < alpha_sig
                    if scores.mean() < base_scores.mean():
                        wins += 1
                        sig_wins += significant
                    elif scores.mean() > base_scores.mean():
                        losses += 1
                        sig_losses += significant
                rows.append(SummaryRow(strategy, learner, metric, wins, losses,
                                       sig_wins, sig_losses, compared))
    return rows


# --------------------------------------------------------------------------
# manifests and the benchmark driver

@dataclass(frozen=True)
class DatasetEntry:
    name: str
    path: str
    target: str
    fmt: str = "auto"

    def load(self) -> Dataset:
        return load_table(self.path, self.target, fmt=self.fmt)


@dataclass(frozen=True)
class RunManifest:
    datasets: tuple[DatasetEntry, ...]
    strategies: tuple[StrategySpec, ...]
    learners: tuple[LearnerSpec, ...]
    repeats: int
    folds: int
    seed: int
    output_dir: str = "."

    @classmethod
    def from_json(cls, path: str | Path) -> "RunManifest":
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
        try:
            datasets = tuple(
                DatasetEntry(
                    name=d["name"], path=d["path"], target=d["target"], fmt=d.get("format", "auto")
                )
                for d in raw["datasets"]
            )
            strategies = tuple(
                StrategySpec(s["name"], dict(s.get("params", {}))) for s in raw["strategies"]
            )
            learners = tuple(
                LearnerSpec(l["name"], dict(l.get("params", {}))) for l in raw["learners"]
            )
            plan = raw.get("plan", {})
            manifest = cls(
                datasets=datasets,
                strategies=strategies,
                learners=learners,
                repeats=int(plan.get("repeats", 2)),
                folds=int(plan.get("folds", 5)),
                seed=int(raw["seed"]),
                output_dir=str(raw.get("output_dir", path.parent)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestError(f"manifest {path} is malformed: {exc}") from exc
        missing = [d.path for d in manifest.datasets if not Path(d.path).exists()]
        if missing:
            raise ManifestError(f"manifest references missing dataset files: {missing}")
        if not manifest.datasets or not manifest.strategies or not manifest.learners:
            raise ManifestError("manifest needs at least one dataset, strategy and learner")
        return manifest


def _run_task(args) -> list[EvalRecord]:
    entry, strategy, learner, repeats, folds, seed = args
    ds = entry.load()
    plan = make_plan(ds.n, repeats, folds, seed=stable_key_hash(seed, "plan", entry.name))
    return run_experiment(ds, strategy, learner, plan, dataset_name=entry.name, seed=seed)


def run_benchmark(manifest: RunManifest, jobs: int = 1) -> list[EvalRecord]:
    """Run the full dataset x strategy x learner grid.

    The fold plan depends only on (seed, dataset), so every strategy sees the
    same folds and records pair up for the signed-rank comparisons. Results
    are merged in sorted key order regardless of worker scheduling.
    """
    tasks = [
        (entry, strategy, learner, manifest.repeats, manifest.folds, manifest.seed)
        for entry in manifest.datasets
        for strategy in manifest.strategies
        for learner in manifest.learners
    ]
    if jobs > 1:
        # spawn, not fork: the compiled kernels may have started OpenMP
        # threads in this process, and forking such a process is unsafe
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=jobs, mp_context=ctx) as pool:
            chunks = list(pool.map(_run_task, tasks))
    else:
        chunks = [_run_task(t) for t in tasks]
    records = [rec for chunk in chunks for rec in chunk]
    records.sort(key=EvalRecord.key)
    return records


# --------------------------------------------------------------------------
# CSV round-trips (records stay byte-stable: runtimes live in their own file)

def _render(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_records_csv(records: Sequence[EvalRecord], path: str | Path):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_FIELDS)
        for r in sorted(records, key=EvalRecord.key):
            writer.writerow([_render(getattr(r, f)) for f in RECORD_FIELDS])


def write_runtimes_csv(records: Sequence[EvalRecord], path: str | Path):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RUNTIME_FIELDS)
        for r in sorted(records, key=EvalRecord.key):
            writer.writerow([_render(getattr(r, f)) for f in RUNTIME_FIELDS])


def read_records_csv(path: str | Path) -> list[EvalRecord]:
    records = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            records.append(
                EvalRecord(
                    dataset=row["dataset"],
                    strategy=row["strategy"],
                    learner=row["learner"],
                    repeat=int(row["repeat"]),
                    fold=int(row["fold"]),
                    status=row["status"],
                    reason=row["reason"],
                    rmse=float(row["rmse"]),
                    rw_rmse=float(row["rw_rmse"]),
                    sera=float(row["sera"]),
                )
            )
    return records


def write_summary_csv(rows: Sequence[SummaryRow], path: str | Path):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("strategy", "learner", "metric", "wins", "losses",
                         "significant_wins", "significant_losses", "datasets"))
        for r in rows:
            writer.writerow([r.strategy, r.learner, r.metric, r.wins, r.losses,
                             r.significant_wins, r.significant_losses, r.datasets])
