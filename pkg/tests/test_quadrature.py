import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dilquant.errors import QuadratureFailure
from dilquant.quadrature import GAUSS_WEIGHTS, KRONROD_WEIGHTS, NODES, integrate, integrate_pieces

from conftest import quad_oracle


class TestRule:
    def test_weights_integrate_constants(self):
        assert KRONROD_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
        assert GAUSS_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)

    @pytest.mark.parametrize("k", range(0, 23))
    def test_kronrod_exact_for_polynomials(self, k):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        assert KRONROD_WEIGHTS @ NODES ** k == pytest.approx(exact, abs=1e-14)

    @pytest.mark.parametrize("k", range(0, 14))
    def test_gauss_exact_for_polynomials(self, k):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        assert GAUSS_WEIGHTS @ NODES ** k == pytest.approx(exact, abs=1e-14)


class TestIntegrate:
    @pytest.mark.parametrize("func,a,b", [
        (lambda x: np.exp(-x * x), -np.inf, np.inf),
        (lambda x: np.exp(-x), 0.0, np.inf),
        (lambda x: np.abs(x) ** 0.5, -1.0, 2.0),
        (lambda x: 1.0 / (1.0 + x * x) ** 2, -np.inf, 3.0),
        (lambda x: np.sin(10 * x) ** 2, 0.0, math.pi),
        (lambda x: np.log(x), 0.0, 1.0),
        (lambda x: x ** -0.5, 0.0, 1.0),
        (lambda x: np.abs(x) ** -0.5 * np.exp(-x * x), -np.inf, np.inf),
    ])
    def test_matches_scipy_quad(self, func, a, b):
        val, err = integrate(func, [a], [b])
        assert val[0] == pytest.approx(quad_oracle(func, a, b), rel=1e-10, abs=1e-12)
        assert err[0] <= 1e-10

    def test_reversed_interval_flips_sign(self):
        fwd, _ = integrate(np.exp, [0.0], [1.0])
        rev, _ = integrate(np.exp, [1.0], [0.0])
        assert rev[0] == pytest.approx(-fwd[0], rel=1e-15)

    def test_empty_interval_is_zero(self):
        val, _ = integrate(np.exp, [0.5], [0.5])
        assert val[0] == 0.0

    def test_params_are_broadcast_per_interval(self):
        c = np.array([0.0, 1.0, 2.0])
        val, _ = integrate(lambda x, c: (x - c) ** 2, np.zeros(3), np.ones(3), args=(c,))
        exact = [((1 - ci) ** 3 + ci ** 3) / 3 for ci in c]
        np.testing.assert_allclose(val, exact, rtol=1e-14)

    def test_pieces_sum_rows(self):
        edges = np.array([[0.0, 0.5, 1.0], [-np.inf, 0.0, np.inf]])
        val, _ = integrate_pieces(lambda x: np.exp(-x * x), edges)
        assert val[0] == pytest.approx(quad_oracle(lambda x: math.exp(-x * x), 0, 1), rel=1e-13)
        assert val[1] == pytest.approx(math.sqrt(math.pi), rel=1e-13)

    def test_unreachable_tolerance_raises(self):
        with pytest.raises(QuadratureFailure):
            integrate(lambda x: np.sin(1.0 / x), [1e-12], [1.0], abs_tol=1e-300, rel_tol=0.0,
                      max_depth=6)

    def test_non_finite_integrand_raises(self):
        with pytest.raises(QuadratureFailure):
            integrate(lambda x: np.full_like(x, np.nan), [0.0], [1.0])

    @settings(max_examples=40, deadline=None)
    @given(st.floats(-5, 5), st.floats(0.01, 5), st.integers(0, 6))
    def test_gaussian_moments_property(self, m, width, k):
        f = lambda x: x ** k * np.exp(-0.5 * (x - m) ** 2)
        val, _ = integrate(f, [m - width], [m + width])
        ref = quad_oracle(lambda x: x ** k * math.exp(-0.5 * (x - m) ** 2), m - width, m + width)
        assert val[0] == pytest.approx(ref, rel=1e-9, abs=1e-12)
