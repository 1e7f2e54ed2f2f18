import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dilquant import distributions as dist
from dilquant.analysis import (RateCurve, empirical_measure_test, j_tilde, phi_r, phi_r_argmax,
                               phi_r_argmax_closed, q_inf, rate_curve, regression_experiment,
                               regression_slope, zador_constant)
from dilquant.dilation import DilationParams, dilate, theta_star
from dilquant.errors import DivergentIntegral, UnsupportedDimension, ValidationError
from dilquant.optimal import newton_lr
from dilquant.quantizer import Grid

from conftest import CATALOG_1D, EXPONENTIAL, HYPER_EXP, HYPER_GAMMA, NORMAL, UNIFORM, greedy_sequence, quad_oracle


def gaussian_power_mass(p):
    """int phi^p over the line."""
    return (2 * math.pi) ** ((1 - p) / 2) / math.sqrt(p)


class TestRateCurve:
    @pytest.mark.parametrize("r", [1.5, 2, 3])
    def test_uniform_flat(self, r):
        grids = [newton_lr(UNIFORM, n, r) for n in (2, 5, 11)]
        curve = rate_curve(grids, UNIFORM, r)
        np.testing.assert_allclose(curve.normalized, j_tilde(r), atol=1e-9)
        assert curve.spread() == pytest.approx(1.0, abs=1e-8)

    def test_single_grid(self):
        curve = rate_curve([Grid([0.0])], NORMAL, 2)
        assert len(curve.rows) == 1
        assert curve.rows[0][2] == curve.rows[0][1] == pytest.approx(1.0)

    def test_increasing_levels_required(self):
        with pytest.raises(ValidationError):
            rate_curve([Grid([0.0, 1.0]), Grid([0.0])], NORMAL, 2)

    def test_greedy_plateau(self):
        seq = greedy_sequence(NORMAL, 2, 255)
        curve = rate_curve([seq.level_grid(n) for n in (16, 32, 64, 128, 255)], NORMAL, 2)
        assert np.all(np.diff(curve.errors) < 0)
        assert curve.spread() < 1.5

    def test_dilated_rows(self):
        g = Grid([-1.0, 1.0])
        params = DilationParams(2.0)
        curve = rate_curve([g], NORMAL, 2, params=params)
        assert isinstance(curve, RateCurve)
        assert curve.rows[0][1] == rate_curve([dilate(g, params)], NORMAL, 2).rows[0][1]


class TestZador:
    @pytest.mark.parametrize("s", [1, 2, 3, 4])
    def test_j_tilde_is_uniform_constant(self, s):
        assert j_tilde(s) == pytest.approx(0.5 * (s + 1) ** (-1 / s))

    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_gaussian_closed_form(self, r):
        expected = j_tilde(r) * gaussian_power_mass(1 / (1 + r)) ** ((1 + r) / r)
        assert zador_constant(NORMAL, r) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("spec", CATALOG_1D, ids=lambda s: s.label())
    def test_zador_against_scipy(self, spec):
        f = lambda x: float(dist.density(spec, x)) ** (1 / 3)
        lo, hi = dist.support(spec)
        mass = quad_oracle(f, -np.inf, 0) + quad_oracle(f, 0, np.inf) if math.isinf(lo) else quad_oracle(f, lo, hi)
        assert zador_constant(spec, 2) == pytest.approx(j_tilde(2) * mass ** 1.5, rel=1e-8)

    @pytest.mark.parametrize("spec", CATALOG_1D, ids=lambda s: s.label())
    @pytest.mark.parametrize("r", [1, 2])
    def test_q_inf_collapses_to_zador(self, spec, r):
        params = DilationParams.centered(spec, 1.0)
        assert q_inf(spec, params, r, r) == pytest.approx(zador_constant(spec, r), rel=1e-8)

    @pytest.mark.parametrize("spec", [NORMAL, HYPER_EXP, EXPONENTIAL], ids=lambda s: s.label())
    def test_q_inf_at_theta_star_is_zador_of_s(self, spec):
        r, s = 2, 3
        params = DilationParams.centered(spec, theta_star(spec, r, s))
        assert q_inf(spec, params, r, s) == pytest.approx(zador_constant(spec, s), rel=1e-8)

    def test_hyper_gamma_identity_needs_zero_shape(self):
        r, s = 2, 3
        flat = dist.DistributionSpec.hyper_gamma(1.0, 2.0, 0.0)
        params = DilationParams.centered(flat, theta_star(flat, r, s))
        assert q_inf(flat, params, r, s) == pytest.approx(zador_constant(flat, s), rel=1e-8)
        # a nonzero |x|^beta factor breaks the identity, including at the companion beta*
        for beta in (2.0, 0.75):
            spec = dist.DistributionSpec.hyper_gamma(1.0, 2.0, beta)
            params = DilationParams.centered(spec, theta_star(spec, r, s))
            assert q_inf(spec, params, r, s) > zador_constant(spec, s) * (1 + 1e-3)

    def test_normal_closed_form(self):
        r, s = 2, 3
        theta = theta_star(NORMAL, r, s)
        # int phi^{-1} theta phi(theta x) dx
        second = theta * math.sqrt(2 * math.pi) * 1 / math.sqrt(2 * math.pi) * math.sqrt(2 * math.pi / (theta ** 2 - 1))
        expected = theta * j_tilde(s) * gaussian_power_mass(1 / 3) * second ** (1 / s)
        assert q_inf(NORMAL, DilationParams(theta), r, s) == pytest.approx(expected, rel=1e-10)

    def test_q_inf_above_zador_off_theta_star(self):
        r, s = 2, 3
        at_star = q_inf(NORMAL, DilationParams(theta_star(NORMAL, r, s)), r, s)
        for theta in (1.05, 1.5, 2.5):
            assert q_inf(NORMAL, DilationParams(theta), r, s) > at_star

    def test_divergent(self):
        with pytest.raises(DivergentIntegral):
            q_inf(NORMAL, DilationParams(0.9), 2, 3)

    def test_dimension(self):
        with pytest.raises(UnsupportedDimension):
            zador_constant(dist.DistributionSpec.normal(d=2), 2)


class TestEmpiricalMeasure:
    def test_uniform_equidistributed(self):
        rep = empirical_measure_test(newton_lr(UNIFORM, 64, 2), UNIFORM, 2)
        assert rep.tv < 1e-12
        assert rep.observed.sum() == pytest.approx(1.0)
        assert rep.target.sum() == pytest.approx(1.0)
        assert len(rep.rows()) == 32

    def test_normal_theta_star(self):
        g = newton_lr(NORMAL, 128, 2, init="companding")
        params = DilationParams(theta_star(NORMAL, 2, 3))
        dilated = empirical_measure_test(dilate(g, params), NORMAL, 3).tv
        plain = empirical_measure_test(g, NORMAL, 3).tv
        assert dilated < 0.05 < plain

    def test_bins(self):
        rep = empirical_measure_test(Grid([0.0, 1.0]), NORMAL, 2, bins=8)
        assert rep.edges.shape == (9,)
        assert np.all(np.diff(rep.edges) > 0)


class TestRegression:
    def test_self_slope(self):
        x = np.random.default_rng(0).normal(size=50)
        assert regression_slope(x, x) == pytest.approx(1.0, abs=1e-14)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.1, 10), st.floats(-5, 5))
    def test_affine_slope(self, a, b):
        x = np.linspace(-2, 3, 17)
        assert regression_slope(x, a * x + b) == pytest.approx(a, rel=1e-9)

    def test_sorting(self):
        x = np.array([3.0, 1.0, 2.0])
        assert regression_slope(x, np.array([2.0, 6.0, 4.0])) == pytest.approx(2.0)

    @pytest.mark.parametrize("x, y", [([1.0, 2.0], [1.0]), ([1.0], [1.0])])
    def test_invalid(self, x, y):
        with pytest.raises(ValidationError):
            regression_slope(x, y)

    def test_experiment_definition(self):
        seq2 = greedy_sequence(NORMAL, 2, 255)
        seq3 = greedy_sequence(NORMAL, 3, 255)
        rows = regression_experiment(NORMAL, 2, 3, [63, 127], sequences=(seq2, seq3))
        theta = theta_star(NORMAL, 2, 3)
        for n, slope in rows:
            x = theta * seq2.level_grid(n).values
            assert slope == pytest.approx(regression_slope(x, seq3.level_grid(n).values), rel=1e-14)
            assert 0.95 < slope < 1.02

    def test_same_order_is_theta_inverse(self):
        seq = greedy_sequence(HYPER_GAMMA, 2, 64)
        rows = regression_experiment(HYPER_GAMMA, 2, 2, [64], sequences=(seq, seq))
        assert rows[0][1] == pytest.approx(1.0, abs=1e-12)


class TestPhi:
    def test_endpoints(self):
        assert phi_r(1e-12, 2) == pytest.approx(0.0, abs=1e-12)
        assert phi_r(1 / 3 - 1e-12, 2) == pytest.approx(0.0, abs=1e-12)

    def test_argmax_example(self):
        assert phi_r_argmax(2) == pytest.approx(math.sqrt(1 / 3) / 3, abs=1e-6)

    @pytest.mark.parametrize("r", [0.5, 1, 2, 3, 5])
    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_argmax_closed(self, r, d):
        assert phi_r_argmax(r, d) == pytest.approx(phi_r_argmax_closed(r, d), abs=1e-6)

    def test_domain(self):
        with pytest.raises(ValidationError):
            phi_r(0.5, 2)
