"""Command-line interface: relevance inspection, resampling, evaluation,
batch benchmarks and summary recomputation.

Every randomized subcommand requires an explicit seed (flag or the
IR_AUGMENT_SEED environment variable); machine-readable outputs are sorted
so identical inputs diff clean.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._util import stable_key_hash
from .errors import IrAugmentError
from .generator import CartGenParams, cartgen_ir
from .harness import (
    BASELINE_NAMES,
    STRATEGY_CARTGEN,
    STRATEGY_NONE,
    LearnerSpec,
    RunManifest,
    StrategySpec,
    make_plan,
    read_records_csv,
    run_benchmark,
    run_experiment,
    wins_losses,
    write_records_csv,
    write_runtimes_csv,
    write_summary_csv,
)
from .relevance import build_relevance, rare_count
from .tabular import load_table, write_csv
from .weighting import rarity_scores

STRATEGY_CHOICES = (STRATEGY_NONE, STRATEGY_CARTGEN) + BASELINE_NAMES


def _add_input_args(p: argparse.ArgumentParser):
    p.add_argument("--input", required=True, help="dataset file (CSV or ARFF)")
    p.add_argument("--target", required=True, help="target column name")
    p.add_argument("--format", default="auto", choices=("auto", "csv", "arff"),
                   help="input format (default: by extension)")


def _add_strategy_args(p: argparse.ArgumentParser):
    p.add_argument("--strategy", required=True, choices=STRATEGY_CHOICES)
    p.add_argument("--alpha", type=float, default=1.0, help="rarity exponent")
    p.add_argument("--eta", type=float, default=0.5, help="synthetic volume as a fraction of n")
    p.add_argument("--density", default="kde", choices=("kde", "denseweight", "relevance"))
    p.add_argument("--delta", type=float, default=None, help="noise fraction of column std")
    p.add_argument("--mode", default="balance", choices=("balance", "extreme"))
    p.add_argument("--po", type=float, default=0.5, help="oversampling fraction")
    p.add_argument("--pu", type=float, default=0.5, help="undersampling fraction")
    p.add_argument("--k", type=int, default=5, help="neighbor count")
    p.add_argument("--threshold", type=float, default=0.8, help="relevance threshold")
    p.add_argument("--min-leaf", type=int, default=None, help="tree leaf size floor")


def _strategy_spec(args) -> StrategySpec:
    name = args.strategy
    if name == STRATEGY_NONE:
        return StrategySpec(name)
    if name == STRATEGY_CARTGEN:
        params = {"alpha": args.alpha, "eta": args.eta, "density": args.density,
                  "delta": args.delta if args.delta is not None else 0.0}
        if args.min_leaf is not None:
            params["min_leaf"] = args.min_leaf
            params["min_split"] = 2 * args.min_leaf
        return StrategySpec(name, params)
    params: dict = {"threshold": args.threshold}
    if name in ("ru", "ro", "gn", "smoter", "smogn"):
        params["mode"] = args.mode
    if name in ("gn", "smogn"):
        params["delta"] = args.delta if args.delta is not None else 0.05
    if name in ("smoter", "smogn"):
        params["k"] = args.k
    if name == "wercs":
        params = {"po": args.po, "pu": args.pu}
    return StrategySpec(name, params)


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("IR_AUGMENT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise IrAugmentError(f"IR_AUGMENT_SEED must be an integer, got {env!r}") from exc
    raise IrAugmentError("a seed is required: pass --seed or set IR_AUGMENT_SEED")


def _cmd_relevance(args) -> int:
    ds = load_table(args.input, args.target, fmt=args.format)
    rel = build_relevance(ds.y)
    count, fraction = rare_count(rel, ds.y, args.threshold)
    payload = {
        "dataset": {"path": args.input, "n": ds.n, "p": ds.p, "target": args.target},
        "relevance": rel.to_dict(),
        "rare": {"threshold": args.threshold, "count": count, "fraction": fraction},
    }
    print(json.dumps(payload, sort_keys=True, indent=2))
    if args.grid_out:
        lo, hi = float(ds.y.min()), float(ds.y.max())
        pad = 0.05 * (hi - lo) if hi > lo else 1.0
        grid = np.linspace(lo - pad, hi + pad, args.grid_points)
        with Path(args.grid_out).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["y", "relevance"])
            for y, phi in zip(grid, rel(grid)):
                writer.writerow([repr(float(y)), repr(float(phi))])
    return 0


def _cmd_resample(args) -> int:
    ds = load_table(args.input, args.target, fmt=args.format)
    seed = _resolve_seed(args)
    spec = _strategy_spec(args)
    if args.dump_weights and spec.name != STRATEGY_CARTGEN:
        raise IrAugmentError("--dump-weights applies to the cartgen-ir strategy only")
    provenance = None
    if spec.name == STRATEGY_CARTGEN:
        params = CartGenParams(seed=seed, **{k: v for k, v in spec.params.items()
                                             if k in ("alpha", "eta", "density", "delta")})
        if args.dump_weights:
            rel = build_relevance(ds.y) if params.density.value == "relevance" else None
            weights = rarity_scores(ds.y, params.density, params.alpha, rel=rel)
            with Path(args.dump_weights).open("w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["y", "weight"])
                for y, w in zip(ds.y, weights.probs):
                    writer.writerow([repr(float(y)), repr(float(w))])
        aug = cartgen_ir(ds, params, keep_trees=bool(args.dump_trees))
        out_ds, provenance = aug.combined, aug.provenance
        if args.dump_trees:
            dump = [{"column": name, "tree": tree.to_dict()} for name, tree in (aug.column_trees or ())]
            Path(args.dump_trees).write_text(json.dumps(dump, sort_keys=True, indent=2), encoding="utf-8")
    else:
        if args.tag_provenance:
            raise IrAugmentError("--tag-provenance applies to the cartgen-ir strategy only")
        if args.dump_trees:
            raise IrAugmentError("--dump-trees applies to the cartgen-ir strategy only")
        rel = None
        if spec.name != STRATEGY_NONE:
            rel = build_relevance(ds.y)
        out_ds = spec.resample(ds, rel, seed)
    extra = {"provenance": list(provenance)} if args.tag_provenance else None
    write_csv(out_ds, args.out, extra_columns=extra)
    return 0


def _cmd_evaluate(args) -> int:
    ds = load_table(args.input, args.target, fmt=args.format)
    seed = _resolve_seed(args)
    spec = _strategy_spec(args)
    learner_params = {"n_estimators": args.n_estimators, "max_features": args.max_features}
    learner = LearnerSpec("rf", learner_params) if args.learner == "rf" else LearnerSpec("cart")
    name = Path(args.input).stem
    plan = make_plan(ds.n, args.repeats, args.folds, seed=stable_key_hash(seed, "plan", name))
    records = run_experiment(ds, spec, learner, plan, dataset_name=name, seed=seed)
    with Path(args.out).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset", "strategy", "learner", "repeat", "fold",
                         "rmse", "rw_rmse", "sera", "runtime_s"])
        for r in records:
            writer.writerow([r.dataset, r.strategy, r.learner, r.repeat, r.fold,
                             repr(r.rmse), repr(r.rw_rmse), repr(r.sera),
                             repr(r.resample_runtime_s + r.fit_runtime_s)])
    skipped = sum(r.status != "ok" for r in records)
    if skipped:
        print(f"warning: {skipped} of {len(records)} folds skipped", file=sys.stderr)
    return 0


def _cmd_benchmark(args) -> int:
    manifest = RunManifest.from_json(args.manifest)
    out_dir = Path(args.out_dir if args.out_dir is not None else manifest.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = args.jobs if args.jobs is not None else (os.cpu_count() or 1)
    records = run_benchmark(manifest, jobs=max(1, jobs))
    write_records_csv(records, out_dir / "records.csv")
    write_runtimes_csv(records, out_dir / "runtimes.csv")
    write_summary_csv(wins_losses(records, baseline=args.baseline, alpha_sig=args.alpha_sig),
                      out_dir / "summary.csv")
    print(f"wrote {len(records)} records to {out_dir}")
    return 0


def _cmd_compare(args) -> int:
    records = read_records_csv(args.records)
    rows = wins_losses(records, baseline=args.baseline, alpha_sig=args.alpha_sig)
    if args.out:
        write_summary_csv(rows, args.out)
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(("strategy", "learner", "metric", "wins", "losses",
                         "significant_wins", "significant_losses", "datasets"))
        for r in rows:
            writer.writerow([r.strategy, r.learner, r.metric, r.wins, r.losses,
                             r.significant_wins, r.significant_losses, r.datasets])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ir-augment",
        description="Rarity-weighted resampling and synthetic data generation "
                    "for imbalanced regression",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("relevance", help="build the relevance function and report rare counts")
    _add_input_args(p)
    p.add_argument("--threshold", type=float, default=0.8)
    p.add_argument("--grid-out", default=None, help="also write a (y, relevance) CSV grid")
    p.add_argument("--grid-points", type=int, default=512)
    p.set_defaults(func=_cmd_relevance)

    p = sub.add_parser("resample", help="apply one resampling strategy and write the result")
    _add_input_args(p)
    _add_strategy_args(p)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tag-provenance", action="store_true",
                   help="append a provenance column marking synthetic rows")
    p.add_argument("--dump-weights", default=None, help="write the (y, weight) CSV")
    p.add_argument("--dump-trees", default=None, help="write the per-column tree JSON")
    p.set_defaults(func=_cmd_resample)

    p = sub.add_parser("evaluate", help="cross-validate one strategy x learner combination")
    _add_input_args(p)
    _add_strategy_args(p)
    p.add_argument("--learner", default="rf", choices=("rf", "cart"))
    p.add_argument("--n-estimators", type=int, default=100)
    p.add_argument("--max-features", default="sqrt", choices=("sqrt", "log2", "all"))
    p.add_argument("--repeats", type=int, default=2)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="per-fold metrics CSV")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("benchmark", help="run a manifest-driven benchmark grid")
    p.add_argument("--manifest", required=True, help="run manifest JSON (carries the seed)")
    p.add_argument("--out-dir", default=None, help="override the manifest output directory")
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")
    p.add_argument("--baseline", default=STRATEGY_NONE)
    p.add_argument("--alpha-sig", type=float, default=0.05)
    p.set_defaults(func=_cmd_benchmark)

    p = sub.add_parser("compare", help="recompute the wins/losses summary from records")
    p.add_argument("--records", required=True, help="records CSV written by benchmark")
    p.add_argument("--out", default=None, help="summary CSV (stdout when omitted)")
    p.add_argument("--baseline", default=STRATEGY_NONE)
    p.add_argument("--alpha-sig", type=float, default=0.05)
    p.set_defaults(func=_cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IrAugmentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
