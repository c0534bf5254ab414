import numpy as np
import pytest

from ir_augment import build_relevance, kde, rarity_scores, silverman_bandwidth
from ir_augment.weighting import WeightMethod, kde_on_grid


class TestKde:
    def test_two_point_symmetry(self):
        est = kde([0.0, 1.0], bandwidth=1.0)
        assert est.values[0] == est.values[1]

    def test_evenly_spaced_interior_near_flat(self):
        y = np.linspace(0.0, 1.0, 101)
        est = kde(y)
        interior = est.values[(y >= 0.25) & (y <= 0.75)]
        assert interior.max() / interior.min() < 1.05

    def test_integrates_to_one(self):
        rng = np.random.default_rng(4)
        y = rng.normal(size=500)
        grid = np.linspace(y.min() - 5.0, y.max() + 5.0, 4001)
        dens = kde_on_grid(y, grid)
        assert np.trapezoid(dens, grid) == pytest.approx(1.0, abs=1e-2)

    def test_silverman_formula(self):
        rng = np.random.default_rng(1)
        y = rng.normal(size=200)
        q1, q3 = np.quantile(y, [0.25, 0.75])
        expected = 0.9 * min(np.std(y), (q3 - q1) / 1.34) * 200 ** (-0.2)
        assert silverman_bandwidth(y) == pytest.approx(expected, rel=1e-15)
        assert kde(y).bandwidth == pytest.approx(expected, rel=1e-15)

    def test_degenerate_spread_fallback(self):
        # iqr can be zero while std is not; bandwidth must stay positive
        y = np.array([0.0] * 30 + [100.0])
        assert silverman_bandwidth(y) > 0

    def test_needs_two_values(self):
        with pytest.raises(ValueError):
            kde([1.0])

    def test_identical_values_need_explicit_bandwidth(self):
        with pytest.raises(ValueError):
            kde([2.0, 2.0, 2.0])
        est = kde([2.0, 2.0, 2.0], bandwidth=0.5)
        assert np.all(est.values > 0)


@pytest.fixture
def skewed():
    # normal bulk plus a detached high tail, so the upper fence is active
    rng = np.random.default_rng(21)
    return np.concatenate([rng.normal(0.0, 1.0, size=280), rng.uniform(6.0, 12.0, size=20)])


class TestRarityScores:
    @pytest.mark.parametrize("method", ["kde", "denseweight", "relevance"])
    @pytest.mark.parametrize("alpha", [0.0, 1.0, 1.5, 2.0])
    def test_probs_sum_to_one_and_positive(self, skewed, method, alpha):
        rel = build_relevance(skewed) if method == "relevance" else None
        w = rarity_scores(skewed, method, alpha, rel=rel)
        assert w.probs.sum() == pytest.approx(1.0, abs=1e-9)
        assert np.all(w.probs > 0)

    def test_alpha_zero_is_uniform(self, skewed):
        w = rarity_scores(skewed, WeightMethod.KDE, 0.0)
        assert np.allclose(w.probs, 1.0 / skewed.size, rtol=0, atol=0)

    def test_uniform_sample_stays_near_uniform(self):
        # inverse-density weighting only: min-max scaled densities amplify the
        # tiny interior density variation by design, so that method is exempt
        y = np.linspace(0.0, 1.0, 500)
        w = rarity_scores(y, "kde", 1.0)
        interior = w.probs[(y >= 0.25) & (y <= 0.75)]
        assert np.all(np.abs(interior - 1.0 / y.size) < 0.1 / y.size)

    def test_bimodal_rare_points_get_more_mass(self):
        rng = np.random.default_rng(9)
        y = np.concatenate([rng.normal(0.0, 0.1, size=1000), rng.normal(10.0, 0.1, size=10)])
        w = rarity_scores(y, "kde", 1.0)
        assert w.probs[1000:].mean() > w.probs[:1000].mean()

    def test_kde_monotone_in_density(self, skewed):
        w = rarity_scores(skewed, "kde", 1.0)
        dens = kde(skewed).values
        order = np.argsort(dens)
        ranked = w.probs[order]
        distinct = np.diff(dens[order]) > 0
        assert np.all(np.diff(ranked)[distinct] < 0)

    def test_alpha_sharpens_low_density_mass(self, skewed):
        dens = kde(skewed).values
        decile = dens <= np.quantile(dens, 0.1)
        for method in ("kde", "relevance"):
            rel = build_relevance(skewed) if method == "relevance" else None
            shares = [
                rarity_scores(skewed, method, a, rel=rel).probs[decile].sum()
                for a in (0.0, 1.0, 1.5, 2.0)
            ]
            assert all(s2 >= s1 - 1e-12 for s1, s2 in zip(shares, shares[1:]))

    def test_denseweight_mean_one_before_selection_normalization(self, skewed):
        # recompute the documented formula and compare
        alpha = 1.5
        dens = kde(skewed).values
        scaled = (dens - dens.min()) / (dens.max() - dens.min())
        w = np.maximum(1.0 - alpha * scaled, 1e-6)
        w = w / w.mean()
        assert w.mean() == pytest.approx(1.0, rel=1e-12)
        probs = rarity_scores(skewed, "denseweight", alpha).probs
        assert np.allclose(probs, w / w.sum(), rtol=1e-12, atol=0)

    def test_denseweight_constant_density_uniform(self):
        w = rarity_scores([0.0, 1.0], "denseweight", 2.0)  # two points: equal density
        assert np.allclose(w.probs, 0.5, rtol=0, atol=0)

    def test_relevance_requires_rel(self, skewed):
        with pytest.raises(ValueError):
            rarity_scores(skewed, "relevance", 1.0)

    def test_negative_alpha_rejected(self, skewed):
        with pytest.raises(ValueError):
            rarity_scores(skewed, "kde", -0.5)
