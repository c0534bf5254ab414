import numpy as np
import pytest

from ir_augment import RelevanceFunction, adjusted_fences, build_relevance, medcouple, rare_count
from ir_augment.errors import NoRareRegionError


def medcouple_oracle(values):
    """Brute-force pairwise-kernel enumeration, straight from the definition."""
    x = np.sort(np.asarray(values, dtype=np.float64))
    m = float(np.median(x))
    lower = [v for v in x if v <= m]
    upper = [v for v in x if v >= m]
    k = int(np.sum(x == m))
    h = []
    for i, u in enumerate(upper):
        for j, low in enumerate(lower):
            if u == m and low == m:
                d = i + (j - (len(lower) - k)) - (k - 1)
                h.append(0.0 if d == 0 else (1.0 if d > 0 else -1.0))
            else:
                h.append(((u - m) - (m - low)) / (u - low))
    return float(np.median(h))


class TestMedcouple:
    def test_symmetric_sample(self):
        assert medcouple([1, 2, 3]) == 0.0

    def test_median_tie_pair(self):
        # pairs: (1,2) -> -1, (1,4) -> 1/3, (2,2) -> 0 (sign kernel), (2,4) -> 1
        assert medcouple([1, 2, 4]) == pytest.approx(1 / 6, abs=0)

    def test_constant_sample(self):
        assert medcouple([5, 5, 5, 5]) == 0.0

    def test_too_few_values(self):
        with pytest.raises(ValueError):
            medcouple([1, 2])

    def test_matches_bruteforce_oracle(self):
        rng = np.random.default_rng(42)
        for trial in range(100):
            n = int(rng.integers(3, 61))
            if trial % 2 == 0:
                x = rng.normal(size=n) + rng.exponential(size=n)
            else:
                # integer grids force ties, including at the median
                x = rng.integers(0, 6, size=n).astype(float)
            assert medcouple(x) == medcouple_oracle(x), f"trial {trial}"


class TestAdjustedFences:
    def test_zero_skew_reduces_to_tukey(self):
        f = adjusted_fences(np.arange(1.0, 10.0))
        assert f.medcouple == 0.0
        assert f.lower == -3.0 and f.upper == 13.0

    def test_constant_sample(self):
        f = adjusted_fences([5.0] * 6)
        assert f.lower == f.upper == 5.0

    def test_right_skewed_branch(self):
        x = np.array([1, 1, 2, 2, 3, 3, 4, 5, 9, 15], dtype=float)
        mc = medcouple_oracle(x)
        assert mc > 0
        q1, q3 = np.quantile(x, [0.25, 0.75])
        iqr = q3 - q1
        f = adjusted_fences(x)
        assert f.lower == pytest.approx(q1 - 1.5 * np.exp(-4 * mc) * iqr, rel=1e-15)
        assert f.upper == pytest.approx(q3 + 1.5 * np.exp(3 * mc) * iqr, rel=1e-15)

    def test_left_skewed_branch(self):
        x = -np.array([1, 1, 2, 2, 3, 3, 4, 5, 9, 15], dtype=float)
        mc = medcouple_oracle(x)
        assert mc < 0
        q1, q3 = np.quantile(x, [0.25, 0.75])
        iqr = q3 - q1
        f = adjusted_fences(x)
        assert f.lower == pytest.approx(q1 - 1.5 * np.exp(-3 * mc) * iqr, rel=1e-15)
        assert f.upper == pytest.approx(q3 + 1.5 * np.exp(4 * mc) * iqr, rel=1e-15)

    def test_tukey_equivalence_on_symmetric_samples(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            half = rng.exponential(size=25)
            x = np.concatenate([half, -half])  # exactly mirrored -> MC = 0
            f = adjusted_fences(x)
            q1, q3 = np.quantile(x, [0.25, 0.75])
            iqr = q3 - q1
            assert abs(f.lower - (q1 - 1.5 * iqr)) < 1e-12
            assert abs(f.upper - (q3 + 1.5 * iqr)) < 1e-12

    def test_too_few_values(self):
        with pytest.raises(ValueError):
            adjusted_fences([1.0, 2.0, 3.0])


@pytest.fixture
def skewed_sample():
    # normal bulk plus a detached high tail, so the upper fence is active
    rng = np.random.default_rng(11)
    return np.concatenate([rng.normal(0.0, 1.0, size=380), rng.uniform(8.0, 15.0, size=20)])


class TestBuildRelevance:
    def test_median_maps_to_zero(self, skewed_sample):
        rel = build_relevance(skewed_sample)
        assert rel(float(np.median(skewed_sample))) == 0.0

    def test_beyond_active_fence_is_one(self, skewed_sample):
        rel = build_relevance(skewed_sample)
        upper = rel.control_points[-1][0]
        assert rel(upper) == 1.0
        assert rel(upper + 100.0) == 1.0

    def test_one_sided_sample_drops_inactive_fence(self, skewed_sample):
        rel = build_relevance(skewed_sample)
        # exponential data has only a high tail: two control points survive
        assert len(rel.control_points) == 2
        assert rel(float(np.min(skewed_sample)) - 100.0) == 0.0

    def test_no_rare_region(self):
        with pytest.raises(NoRareRegionError):
            build_relevance(np.arange(1.0, 10.0))  # fences [-3, 13] contain everything

    def test_both_tails_when_outliers_on_both_sides(self):
        rng = np.random.default_rng(3)
        x = np.concatenate([rng.normal(size=200), [-40.0, 40.0]])
        rel = build_relevance(x)
        assert len(rel.control_points) == 3
        assert rel(-40.0) == 1.0 and rel(40.0) == 1.0


class TestEvaluation:
    def test_hand_evaluated_hermite_segment(self):
        # zero end slopes make each segment p0 + (p1-p0) * t^2 (3 - 2t)
        rel = RelevanceFunction([(1.0, 0.0), (2.0, 1.0)])
        assert rel(1.5) == pytest.approx(0.5, abs=1e-15)
        assert rel(1.25) == pytest.approx(0.25**2 * (3 - 2 * 0.25), abs=1e-15)
        assert rel(1.75) == pytest.approx(0.75**2 * (3 - 2 * 0.75), abs=1e-15)

    def test_halfway_value_strictly_interior_and_monotone(self, skewed_sample):
        rel = build_relevance(skewed_sample)
        median_y, fence_y = rel.control_points[0][0], rel.control_points[1][0]
        halfway = (median_y + fence_y) / 2
        assert 0.0 < rel(halfway) < 1.0
        assert rel(median_y) < rel(halfway) < rel(fence_y)

    def test_piecewise_monotone(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            x = np.concatenate([rng.normal(size=150), rng.uniform(8.0, 40.0, size=15)])
            rel = build_relevance(x)
            cps = rel.control_points
            for (y0, p0, _), (y1, p1, _) in zip(cps, cps[1:]):
                grid = np.linspace(y0, y1, 101)
                vals = rel(grid)
                diffs = np.diff(vals)
                assert np.all(diffs >= 0) or np.all(diffs <= 0)

    def test_bounded_everywhere(self, skewed_sample):
        rel = build_relevance(skewed_sample)
        rng = np.random.default_rng(0)
        pts = rng.uniform(-1e6, 1e6, size=100_000)
        vals = rel(pts)
        assert np.all((vals >= 0.0) & (vals <= 1.0))

    def test_vector_and_scalar_agree(self, skewed_sample):
        rel = build_relevance(skewed_sample)
        grid = np.linspace(-5, 30, 50)
        vec = rel(grid)
        assert vec.shape == grid.shape
        assert all(rel(float(g)) == v for g, v in zip(grid, vec))

    def test_control_point_validation(self):
        with pytest.raises(ValueError):
            RelevanceFunction([(1.0, 0.0)])
        with pytest.raises(ValueError):
            RelevanceFunction([(1.0, 0.0), (1.0, 1.0)])
        with pytest.raises(ValueError):
            RelevanceFunction([(1.0, 0.0), (2.0, 1.5)])


class TestRareCount:
    def test_threshold_zero_counts_everything(self, skewed_sample):
        rel = build_relevance(skewed_sample)
        count, frac = rare_count(rel, skewed_sample, 0.0)
        assert count == skewed_sample.size and frac == 1.0

    def test_threshold_above_one_counts_nothing(self, skewed_sample):
        rel = build_relevance(skewed_sample)
        count, frac = rare_count(rel, skewed_sample, 1.0 + 1e-9)
        assert count == 0 and frac == 0.0

    def test_fraction(self, skewed_sample):
        rel = build_relevance(skewed_sample)
        count, frac = rare_count(rel, skewed_sample, 0.8)
        assert 0 < count < skewed_sample.size
        assert frac == count / skewed_sample.size
