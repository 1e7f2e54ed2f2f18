import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dilquant import distributions as dist
from dilquant.errors import NonConvergence, UnsupportedDimension, ValidationError
from dilquant.optimal import lloyd, newton_lr, quantile_grid, stationarity_residual
from dilquant.quantizer import Grid, distortion

from conftest import EXPONENTIAL, HYPER_GAMMA, NORMAL, UNIFORM

# Frozen from a brute-force scan over symmetric pairs {-x, x} (step 1e-5,
# quad-based e_3^3) refined by scipy.optimize.minimize_scalar.
NORMAL_R3_PAIR = 0.9008737057931927
NORMAL_R3_PAIR_POWER = 0.36059977106048446
# Frozen from scipy.optimize.minimize over (x1, x2) of the quad-based e_2^2.
NORMAL_R2_TRIPLE = 1.2240063648
NORMAL_R2_TRIPLE_POWER = 0.19017403924790152


def midpoints(n):
    return (2 * np.arange(1, n + 1) - 1) / (2.0 * n)


class TestLloyd:
    @pytest.mark.parametrize("n", [1, 3, 8, 20])
    def test_uniform_midpoints(self, n):
        g = lloyd(UNIFORM, n, init=np.sort(np.random.default_rng(n).uniform(0, 1, n)))
        np.testing.assert_allclose(g.values, midpoints(n), atol=1e-9)

    def test_normal_two_points(self):
        c = math.sqrt(2 / math.pi)
        np.testing.assert_allclose(lloyd(NORMAL, 2).values, [-c, c], atol=1e-9)

    @pytest.mark.parametrize("spec", [NORMAL, EXPONENTIAL, HYPER_GAMMA], ids=lambda s: s.label())
    def test_single_point_is_mean(self, spec):
        mean = dist.abs_moment_1d(spec, 1.0) if spec is EXPONENTIAL else 0.0
        assert lloyd(spec, 1).values[0] == pytest.approx(mean, abs=1e-9)

    def test_median_variant(self):
        assert lloyd(EXPONENTIAL, 1, r=1).values[0] == pytest.approx(math.log(2.0), abs=1e-10)

    def test_monotone_descent(self):
        trace = []
        lloyd(EXPONENTIAL, 6, init=np.linspace(0.1, 0.6, 6), callback=lambda it, x, p: trace.append(p))
        assert len(trace) > 5
        assert np.all(np.diff(trace) <= 1e-15)

    def test_non_convergence(self):
        with pytest.raises(NonConvergence) as info:
            lloyd(NORMAL, 10, max_iter=2)
        assert info.value.residual > 0

    def test_unsupported_r(self):
        with pytest.raises(ValidationError):
            lloyd(NORMAL, 3, r=3)


class TestNewton:
    def test_agrees_with_lloyd_for_r2(self):
        for spec in (NORMAL, EXPONENTIAL):
            a = newton_lr(spec, 7, 2).values
            b = lloyd(spec, 7, tol=1e-12).values
            np.testing.assert_allclose(a, b, atol=1e-8)

    @pytest.mark.parametrize("r", [1.5, 2, 3, 4])
    def test_uniform_midpoints(self, r):
        np.testing.assert_allclose(newton_lr(UNIFORM, 9, r).values, midpoints(9), atol=1e-9)

    def test_normal_r3_pair(self):
        g = newton_lr(NORMAL, 2, 3)
        np.testing.assert_allclose(g.values, [-NORMAL_R3_PAIR, NORMAL_R3_PAIR], atol=1e-8)
        assert distortion(g, NORMAL, 3).value ** 3 == pytest.approx(NORMAL_R3_PAIR_POWER, rel=1e-9)

    def test_normal_r2_triple(self):
        g = newton_lr(NORMAL, 3, 2)
        np.testing.assert_allclose(g.values, [-NORMAL_R2_TRIPLE, 0.0, NORMAL_R2_TRIPLE], atol=1e-8)
        assert distortion(g, NORMAL, 2).value ** 2 == pytest.approx(NORMAL_R2_TRIPLE_POWER, rel=1e-9)

    @pytest.mark.parametrize("spec, r", [(NORMAL, 3), (EXPONENTIAL, 2.5), (HYPER_GAMMA, 2)],
                             ids=["normal", "exponential", "hypergamma"])
    def test_local_minimum(self, spec, r):
        g = newton_lr(spec, 6, r)
        assert stationarity_residual(g.values, spec, r) < 1e-9
        base = distortion(g, spec, r).value
        for i in range(g.n):
            for h in (-1e-4, 1e-4):
                pts = g.values.copy()
                pts[i] += h
                assert distortion(Grid(pts), spec, r).value > base

    def test_rejects_r_le_one(self):
        with pytest.raises(ValidationError):
            newton_lr(NORMAL, 3, 1.0)

    def test_dimension(self):
        with pytest.raises(UnsupportedDimension):
            newton_lr(dist.DistributionSpec.normal(d=2), 3, 2)

    def test_companding_start(self):
        g = newton_lr(NORMAL, 40, 2, init="companding")
        np.testing.assert_allclose(g.values, newton_lr(NORMAL, 40, 2).values, atol=1e-8)

    def test_provenance(self):
        prov = newton_lr(NORMAL, 4, 3).provenance
        assert prov["method"] == "newton" and prov["r"] == 3 and prov["residual"] < 1e-9

    @settings(max_examples=10, deadline=None)
    @given(st.integers(2, 16), st.sampled_from([2.0, 3.0, 4.0]))
    def test_uniform_zador_constant(self, n, r):
        g = newton_lr(UNIFORM, n, r)
        assert n * distortion(g, UNIFORM, r).value == pytest.approx(0.5 * (r + 1) ** (-1 / r), abs=1e-6)


def test_quantile_grid():
    np.testing.assert_allclose(quantile_grid(UNIFORM, 4), midpoints(4))
