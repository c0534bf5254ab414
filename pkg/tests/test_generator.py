import numpy as np
import pytest

from conftest import make_dataset, make_skewed_dataset
from ir_augment import build_relevance, rarity_scores
from ir_augment.cart import CartParams
from ir_augment.errors import NoRareRegionError
from ir_augment.generator import (
    CartGenParams,
    Pool,
    cartgen_ir,
    original_stds,
    perturb_duplicates,
    resample_pool,
    synthesize,
)
from ir_augment.weighting import SelectionWeights, WeightMethod


def uniform_weights(n):
    return SelectionWeights(probs=np.full(n, 1.0 / n), method=WeightMethod.KDE, alpha=0.0)


def point_mass_weights(n, at):
    probs = np.zeros(n)
    probs[at] = 1.0
    return SelectionWeights(probs=probs, method=WeightMethod.KDE, alpha=1.0)


class TestResamplePool:
    def test_eta_zero_empty_pool(self, skewed_ds):
        pool = resample_pool(skewed_ds, uniform_weights(skewed_ds.n), 0.0, np.random.default_rng(0))
        assert pool.size == 0

    @pytest.mark.parametrize("eta", [0.0, 0.25, 0.5, 0.75, 1.0])
    @pytest.mark.parametrize("n", [37, 100, 4177])
    def test_size_law(self, eta, n):
        ds = make_skewed_dataset(n=n, seed=1, n_num=1)
        pool = resample_pool(ds, uniform_weights(n), eta, np.random.default_rng(0))
        assert pool.size == int(np.floor(eta * n + 0.5))

    def test_half_of_4177_is_2089(self):
        ds = make_skewed_dataset(n=4177, seed=2, n_num=1)
        pool = resample_pool(ds, uniform_weights(4177), 0.5, np.random.default_rng(0))
        assert pool.size == 2089

    def test_point_mass_gives_five_copies_with_flags(self):
        ds = make_skewed_dataset(n=10, seed=3, n_num=1, tail_frac=0.2)
        pool = resample_pool(ds, point_mass_weights(10, at=4), 0.5, np.random.default_rng(0))
        assert pool.size == 5
        assert np.all(pool.source_indices == 4)
        assert np.array_equal(pool.duplicate_flags, [False, True, True, True, True])
        assert np.array_equal(pool.rows, np.tile(ds.X[4], (5, 1)))

    def test_flags_mark_every_repeat_across_seeds(self):
        ds = make_skewed_dataset(n=50, seed=4, n_num=1)
        pool = resample_pool(ds, uniform_weights(50), 1.0, np.random.default_rng(5))
        seen = set()
        for flag, src in zip(pool.duplicate_flags, pool.source_indices):
            assert flag == (src in seen)
            seen.add(src)

    def test_misaligned_weights_rejected(self, skewed_ds):
        with pytest.raises(ValueError):
            resample_pool(skewed_ds, uniform_weights(7), 0.5, np.random.default_rng(0))


class TestPerturbDuplicates:
    def test_delta_zero_is_identity(self, skewed_ds):
        pool = resample_pool(skewed_ds, uniform_weights(skewed_ds.n), 0.8, np.random.default_rng(1))
        out = perturb_duplicates(pool, 0.0, original_stds(skewed_ds), np.random.default_rng(2))
        assert out.rows is pool.rows

    def test_first_occurrences_unchanged(self, skewed_ds):
        pool = resample_pool(skewed_ds, uniform_weights(skewed_ds.n), 1.0, np.random.default_rng(1))
        out = perturb_duplicates(pool, 0.5, original_stds(skewed_ds), np.random.default_rng(2))
        firsts = ~pool.duplicate_flags
        assert np.array_equal(out.rows[firsts], pool.rows[firsts])

    def test_nominal_cells_untouched(self, skewed_ds):
        pool = resample_pool(skewed_ds, uniform_weights(skewed_ds.n), 1.0, np.random.default_rng(1))
        out = perturb_duplicates(pool, 0.5, original_stds(skewed_ds), np.random.default_rng(2))
        j = skewed_ds.names.index("c")
        assert np.array_equal(out.rows[:, j], pool.rows[:, j])

    def test_noise_scale(self):
        # column std 10, delta 0.001 -> per-cell noise std 0.01
        rng = np.random.default_rng(11)
        y = rng.normal(0.0, 10.0, size=400)
        y[:20] += 100.0  # high tail (irrelevant here, keeps the fixture honest)
        ds = make_dataset({"y": y}, "y")
        std = ds.column_std(0)
        src = np.zeros(10_001, dtype=np.intp)
        pool = Pool(
            dataset=ds,
            rows=ds.X[src].copy(),
            duplicate_flags=np.array([False] + [True] * 10_000),
            source_indices=src,
        )
        out = perturb_duplicates(pool, 0.001, original_stds(ds), np.random.default_rng(3))
        diffs = out.rows[1:, 0] - pool.rows[1:, 0]
        assert abs(np.std(diffs) - 0.001 * std) <= 0.1 * 0.001 * std


class TestSynthesize:
    def test_identical_pool_rows_reproduce_themselves(self):
        ds = make_dataset({"a": [1.0, 1.0], "y": [2.0, 2.0]}, "y")
        src = np.zeros(20, dtype=np.intp)
        pool = Pool(ds, ds.X[src].copy(), np.ones(20, dtype=bool), src)
        out = synthesize(pool, CartParams(min_leaf=1, min_split=2), np.random.default_rng(0))
        assert np.array_equal(out, pool.rows)

    def test_perfectly_correlated_columns_stay_correlated(self):
        base = np.array([[1.0, 2.0], [2.0, 4.0], [4.0, 8.0]])
        ds = make_dataset({"x": base[:, 0], "y": base[:, 1]}, "y")
        src = np.tile(np.arange(3), 10).astype(np.intp)
        pool = Pool(ds, ds.X[src].copy(), np.zeros(30, dtype=bool), src)
        out = synthesize(pool, CartParams(min_leaf=1, min_split=2), np.random.default_rng(7))
        assert np.all(out[:, 1] == 2.0 * out[:, 0])

    def test_empty_pool(self, skewed_ds):
        pool = resample_pool(skewed_ds, uniform_weights(skewed_ds.n), 0.0, np.random.default_rng(0))
        out = synthesize(pool, CartParams(), np.random.default_rng(0))
        assert out.shape == (0, skewed_ds.p)

    def test_single_column_dataset(self):
        ds = make_skewed_dataset(n=60, seed=5, n_num=0)
        pool = resample_pool(ds, uniform_weights(60), 0.5, np.random.default_rng(1))
        out = synthesize(pool, CartParams(), np.random.default_rng(2))
        assert out.shape == (30, 1)
        assert set(out[:, 0]).issubset(set(pool.rows[:, 0]))

    def test_nominal_cells_only_pool_categories(self, skewed_ds):
        pool = resample_pool(skewed_ds, uniform_weights(skewed_ds.n), 0.5, np.random.default_rng(3))
        out = synthesize(pool, CartParams(), np.random.default_rng(4))
        j = skewed_ds.names.index("c")
        assert set(out[:, j]).issubset(set(pool.rows[:, j]))


class TestCartGenIr:
    def test_eta_zero_returns_original(self, skewed_ds):
        aug = cartgen_ir(skewed_ds, CartGenParams(eta=0.0, seed=1))
        assert aug.combined == skewed_ds
        assert aug.synthetic.shape == (0, skewed_ds.p)
        assert np.all(aug.provenance == "original")

    def test_combined_size_law(self):
        ds = make_skewed_dataset(n=4177, seed=6, n_num=2)
        aug = cartgen_ir(ds, CartGenParams(eta=0.5, seed=0))
        assert aug.synthetic.shape[0] == 2089
        assert aug.combined.n == 4177 + 2089
        assert np.sum(aug.provenance == "synthetic") == 2089

    def test_schema_preserved(self, skewed_ds):
        aug = cartgen_ir(skewed_ds, CartGenParams(eta=0.75, seed=2, delta=0.001))
        assert aug.combined.names == skewed_ds.names
        assert aug.combined.kinds == skewed_ds.kinds
        assert aug.combined.categories == skewed_ds.categories
        j = skewed_ds.names.index("c")
        assert set(aug.synthetic[:, j]).issubset(set(skewed_ds.X[:, j]))

    def test_deterministic(self, skewed_ds):
        params = CartGenParams(alpha=1.5, eta=0.75, density="denseweight", delta=0.001, seed=9)
        a = cartgen_ir(skewed_ds, params)
        b = cartgen_ir(skewed_ds, params)
        assert a.combined == b.combined
        assert np.array_equal(a.provenance, b.provenance)

    def test_synthetic_rows_skew_toward_rare_region(self):
        rng = np.random.default_rng(17)
        y = rng.exponential(scale=2.0, size=2000)
        ds = make_dataset({"x": y * 0.7 + rng.normal(0, 0.5, 2000), "y": y}, "y")
        rel = build_relevance(ds.y)
        aug = cartgen_ir(ds, CartGenParams(alpha=2.0, eta=0.75, density="kde", seed=3))
        assert rel(aug.synthetic[:, 1]).mean() > rel(ds.y).mean()

    def test_no_rare_region_propagates(self):
        ds = make_dataset({"x": list(range(9)), "y": [float(v) for v in range(1, 10)]}, "y")
        with pytest.raises(NoRareRegionError):
            cartgen_ir(ds, CartGenParams(density="relevance", seed=0))

    def test_rarity_concentration_over_seeds(self):
        ds = make_skewed_dataset(n=300, seed=8, n_num=2)
        rel = build_relevance(ds.y)
        orig_mean = rel(ds.y).mean()
        target = ds.target_index
        cart = CartParams(min_leaf=1, min_split=2)
        passes = 0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            w = rarity_scores(ds.y, "kde", 1.5)
            pool = resample_pool(ds, w, 0.5, rng)
            out = synthesize(pool, cart, rng)
            in_pool = set(out[:, target]).issubset(set(pool.rows[:, target]))
            concentrated = rel(pool.rows[:, target]).mean() >= orig_mean
            passes += bool(in_pool and concentrated)
            assert in_pool  # delta=0, min_leaf=1: targets must come from the pool
        assert passes >= 18

    def test_param_validation(self):
        with pytest.raises(ValueError):
            CartGenParams(eta=1.2)
        with pytest.raises(ValueError):
            CartGenParams(delta=-0.1)
        with pytest.raises(ValueError):
            CartGenParams(alpha=-1.0)
        with pytest.raises(ValueError):
            CartGenParams(density="bogus")
