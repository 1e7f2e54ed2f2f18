import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dilquant import distributions as dist
from dilquant.errors import DimensionMismatch, MomentDivergence, ValidationError
from dilquant.quantizer import (Grid, distortion, micro_macro_check, nearest, weights)

from conftest import CATALOG_1D, EXPONENTIAL, HYPER_CAUCHY, NORMAL, UNIFORM, quad_distortion

grid_values = st.lists(st.floats(-4, 4, allow_nan=False), min_size=1, max_size=12, unique=True) \
    .filter(lambda v: len(v) == 1 or np.min(np.diff(np.sort(v))) > 1e-3)


class TestGrid:
    def test_sorted_and_frozen(self):
        g = Grid([3.0, -1.0, 0.5])
        np.testing.assert_array_equal(g.values, [-1.0, 0.5, 3.0])
        assert g.n == 3 and g.d == 1
        with pytest.raises(ValueError):
            g.points[0, 0] = 9.0

    @pytest.mark.parametrize("bad", [[], [1.0, 1.0], [np.nan], [np.inf, 0.0]])
    def test_rejects_bad_points(self, bad):
        with pytest.raises(ValidationError):
            Grid(bad)

    def test_unknown_provenance(self):
        with pytest.raises(ValidationError):
            Grid([0.0], {"method": "magic"})

    def test_json_round_trip(self):
        g = Grid([0.1, 0.2], {"method": "manual", "note": "x"})
        assert Grid.from_json(g.to_json()) == g
        assert Grid.from_json(g.to_json()).provenance == g.provenance

    def test_json_dimension_check(self):
        with pytest.raises(DimensionMismatch):
            Grid.from_json({"d": 2, "points": [[0.0]]})


class TestNearest:
    @pytest.mark.parametrize("pts, x, expected", [
        ([0.0], 3.0, (0, 3.0)),
        ([-1.0, 1.0], 0.0, (0, 1.0)),
        ([0.0, 1.0, 4.0], 2.4, (1, 1.4)),
    ])
    def test_examples(self, pts, x, expected):
        idx, dst = nearest(Grid(pts), x)
        assert idx == expected[0]
        assert dst == pytest.approx(expected[1], abs=1e-15)

    def test_2d_tie_break_lowest_index(self):
        g = Grid([[1.0, 0.0], [-1.0, 0.0]])
        # stored order is preserved in d > 1
        assert nearest(g, [0.0, 0.0]) == (0, 1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            nearest(Grid([[0.0, 0.0]]), [0.0])

    @settings(max_examples=50, deadline=None)
    @given(grid_values, st.floats(-6, 6))
    def test_matches_linear_scan(self, pts, x):
        g = Grid(pts)
        idx, dst = nearest(g, x)
        assert dst == pytest.approx(np.min(np.abs(g.values - x)), abs=1e-15)
        assert abs(g.values[idx] - x) == pytest.approx(dst, abs=1e-15)


class TestDistortion:
    def test_uniform_midpoint_grid(self):
        g = Grid((2 * np.arange(1, 5) - 1) / 8.0)
        assert distortion(g, UNIFORM, 2).value == pytest.approx(1 / (8 * math.sqrt(3)), rel=1e-12)

    def test_normal_singleton(self):
        assert distortion(Grid([0.0]), NORMAL, 2).value == pytest.approx(1.0, rel=1e-12)

    def test_normal_two_point(self):
        c = math.sqrt(2 / math.pi)
        assert distortion(Grid([-c, c]), NORMAL, 2).value == pytest.approx(math.sqrt(1 - 2 / math.pi), rel=1e-12)

    @pytest.mark.parametrize("spec", CATALOG_1D, ids=lambda s: s.label())
    @pytest.mark.parametrize("r", [1.0, 2.0, 2.5])
    def test_matches_scipy_oracle(self, spec, r):
        if r >= dist.moment_bound(spec):
            pytest.skip("moment not finite")
        pts = np.array([-1.3, -0.2, 0.35, 0.9, 2.2])
        lo, hi = dist.support(spec)
        oracle = quad_distortion(pts, lambda x: float(dist.density(spec, x)), r, lo, hi)
        assert distortion(Grid(pts), spec, r).value ** r == pytest.approx(oracle, rel=1e-9)

    def test_moment_divergence(self):
        with pytest.raises(MomentDivergence):
            distortion(Grid([0.0]), HYPER_CAUCHY, 3.0)

    def test_rejects_non_positive_r(self):
        with pytest.raises(ValidationError):
            distortion(Grid([0.0]), NORMAL, 0.0)

    @pytest.mark.parametrize("spec", CATALOG_1D, ids=lambda s: s.label())
    def test_monte_carlo_agrees_with_exact(self, spec):
        g = Grid([-0.8, 0.1, 0.6, 1.7])
        r = 1.5
        exact = distortion(g, spec, r).value
        mc = distortion(g, spec, r, method="monte_carlo", mc_samples=100_000, seed=4)
        assert abs(mc.value - exact) < 4 * mc.stderr
        assert mc.seed == 4 and mc.sample_count == 100_000

    def test_monte_carlo_independent_of_workers(self):
        g = Grid([[0.0, 0.0], [1.0, 1.0]])
        spec = dist.DistributionSpec.normal(d=2)
        one = distortion(g, spec, 2, mc_samples=20_000, seed=1, workers=1).value
        four = distortion(g, spec, 2, mc_samples=20_000, seed=1, workers=4).value
        assert one == four

    @settings(max_examples=25, deadline=None)
    @given(grid_values, st.floats(-5, 5))
    def test_insertion_never_increases(self, pts, y):
        g = Grid(pts)
        if np.min(np.abs(g.values - y)) < 1e-6:
            return
        before = distortion(g, NORMAL, 2).value
        after = distortion(Grid(np.append(g.values, y)), NORMAL, 2).value
        assert after <= before * (1 + 1e-12)


class TestWeights:
    def test_examples(self):
        np.testing.assert_allclose(weights(Grid([0.25, 0.75]), UNIFORM), [0.5, 0.5], atol=1e-15)
        np.testing.assert_allclose(weights(Grid([0.0]), NORMAL), [1.0])
        np.testing.assert_allclose(weights(Grid([math.log(2)]), EXPONENTIAL), [1.0])
        np.testing.assert_allclose(weights(Grid([0.5, 2.0]), EXPONENTIAL),
                                   [1 - math.exp(-1.25), math.exp(-1.25)], rtol=1e-14)

    @settings(max_examples=30, deadline=None)
    @given(grid_values)
    def test_sum_to_one(self, pts):
        for spec in (NORMAL, HYPER_CAUCHY):
            w = weights(Grid(pts), spec)
            assert np.all(w >= 0)
            assert w.sum() == pytest.approx(1.0, abs=1e-12)

    def test_matches_monte_carlo_frequencies(self):
        g = Grid([-1.0, 0.0, 0.4, 2.0])
        w = weights(g, NORMAL)
        x = dist.sample(NORMAL, 200_000, 9)
        freq = np.bincount(np.argmin(np.abs(x[:, None] - g.values[None, :]), axis=1), minlength=4) / len(x)
        se = np.sqrt(w * (1 - w) / len(x))
        assert np.all(np.abs(freq - w) < 4 * se)

    def test_monte_carlo_weights_sum_exactly(self):
        spec = dist.DistributionSpec.normal(d=2)
        w = weights(Grid([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), spec, mc_samples=10_000, seed=0)
        assert w.sum() == 1.0


class TestMicroMacro:
    @pytest.mark.parametrize("spec, pts, y, r, c", [
        (NORMAL, [0.0], 1.0, 2, 0.25),
        (UNIFORM, [0.5], 0.25, 2, 0.1),
        (NORMAL, [-1.0, 1.0], None, 3, 0.2),
        (EXPONENTIAL, [1.0], None, 1.5, 0.3),
    ])
    def test_holds(self, spec, pts, y, r, c):
        res = micro_macro_check(Grid(pts), spec, y, r, c)
        assert res.holds
        assert res.lhs > 0 and res.rhs > 0

    def test_rhs_vanishes_as_c_shrinks(self):
        g = Grid([0.0])
        rhs = [micro_macro_check(g, NORMAL, 1.0, 2, c).rhs for c in (1e-2, 1e-3, 1e-4)]
        assert rhs[0] > rhs[1] > rhs[2]
        assert rhs[2] < 1e-4

    def test_2d_monte_carlo(self):
        spec = dist.DistributionSpec.normal(d=2)
        res = micro_macro_check(Grid([[0.0, 0.0]]), spec, [1.0, 0.0], 2, 0.25, mc_samples=1000)
        assert res.holds

    def test_c_range(self):
        with pytest.raises(ValidationError):
            micro_macro_check(Grid([0.0]), NORMAL, 1.0, 2, 0.5)
