"""
Tests for the free-energy landscape, its fixed points and the rate function
"""

import math
import os
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

# Import after setting up path
from errors import ParameterError
from model.core import ModelParams
from model.landscape import (
    REGIME_CRITICAL,
    REGIME_HIGH,
    REGIME_LOW,
    classify_minimizers,
    entropy,
    fixed_point_iterate,
    grad_phi,
    h_map,
    hess_phi,
    log_cosh,
    log_cosh_deviation,
    minimizer_vector,
    phi,
    rate_function_F,
    regime_of,
    solve_m_star,
)
from model.spectral import CirculantSpec
import logging

# Keep test output quiet
logging.getLogger().setLevel(logging.ERROR)


@st.composite
def spec_and_point(draw):
    s = draw(st.integers(min_value=1, max_value=8))
    alpha = draw(st.floats(min_value=0.01, max_value=0.5))
    beta = draw(st.floats(min_value=2.0 * alpha + 0.01, max_value=1.5))
    x = np.array(draw(st.lists(st.floats(min_value=-1.0, max_value=1.0), min_size=s, max_size=s)))
    return CirculantSpec(s, beta, alpha), x


class TestDerivatives:

    @settings(max_examples=60, deadline=None)
    @given(spec_and_point())
    def test_gradient_matches_finite_differences(self, case):
        spec, x = case
        h = 1e-6
        numeric = np.array([(phi(spec, x + h * e) - phi(spec, x - h * e)) / (2 * h) for e in np.eye(spec.size)])
        np.testing.assert_allclose(grad_phi(spec, x), numeric, atol=1e-6)

    @settings(max_examples=60, deadline=None)
    @given(spec_and_point())
    def test_hessian_matches_finite_differences(self, case):
        spec, x = case
        h = 1e-5
        numeric = np.array([(grad_phi(spec, x + h * e) - grad_phi(spec, x - h * e)) / (2 * h) for e in np.eye(spec.size)])
        np.testing.assert_allclose(hess_phi(spec, x), numeric, atol=1e-5)

    @settings(max_examples=40, deadline=None)
    @given(spec_and_point())
    def test_phi_is_even(self, case):
        spec, x = case
        assert phi(spec, -x) == pytest.approx(phi(spec, x), abs=1e-14)

    def test_log_cosh_is_finite_for_large_arguments(self):
        assert log_cosh(1000.0) == pytest.approx(1000.0 - math.log(2.0))
        assert log_cosh(0.0) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ParameterError):
            phi(CirculantSpec(3, 0.5, 0.2), np.zeros(2))


class TestFixedPoints:

    def test_high_temperature_contracts_to_zero(self):
        spec = CirculantSpec(8, 0.5, 0.2)
        rng = np.random.default_rng(7)
        bound = math.ceil(math.log(1e-12 / 2.0) / math.log(0.9)) + 2
        for _ in range(50):
            result = fixed_point_iterate(spec, rng.uniform(-1.0, 1.0, 8))
            assert result.converged
            assert result.iterations <= bound
            assert np.max(np.abs(result.x)) < 1e-10

    def test_contraction_ratio(self):
        spec = CirculantSpec(8, 0.5, 0.2)
        rng = np.random.default_rng(11)
        for _ in range(50):
            x, y = rng.uniform(-1.0, 1.0, (2, 8))
            ratio = np.max(np.abs(h_map(spec, x) - h_map(spec, y))) / np.max(np.abs(x - y))
            assert ratio <= 0.9 + 1e-9

    def test_low_temperature_converges_to_m_star(self):
        params = ModelParams(beta=0.8, alpha=0.25, n_spins=60, n_blocks=6)
        result = fixed_point_iterate(params.spec, np.ones(6), tol=1e-14)
        assert result.converged
        np.testing.assert_allclose(result.x, minimizer_vector(params), atol=1e-12)

    def test_start_outside_the_cube(self):
        with pytest.raises(ParameterError):
            fixed_point_iterate(CirculantSpec(2, 0.5, 0.2), np.array([1.5, 0.0]))

    def test_non_convergence_is_reported(self):
        result = fixed_point_iterate(CirculantSpec(2, 0.5, 0.2), np.ones(2), max_iter=3)
        assert not result.converged
        assert result.iterations == 3


class TestMStar:

    @pytest.mark.parametrize("theta", [0.3, 0.9, 1.0])
    def test_zero_at_high_temperature(self, theta):
        assert solve_m_star(theta) == 0.0

    @pytest.mark.parametrize("theta,expected", [(1.3, 0.7521), (2.0, 0.9575)])
    def test_positive_root(self, theta, expected):
        m = solve_m_star(theta)
        assert m == pytest.approx(expected, abs=2e-4)
        assert math.tanh(theta * m) == pytest.approx(m, abs=1e-14)

    def test_invalid_theta(self):
        with pytest.raises(ParameterError):
            solve_m_star(0.0)

    def test_regimes(self):
        assert regime_of(0.9) == REGIME_HIGH
        assert regime_of(1.0) == REGIME_CRITICAL
        assert regime_of(1.3) == REGIME_LOW


class TestRateFunction:

    def test_entropy_endpoints(self):
        assert entropy(0.0) == pytest.approx(math.log(2.0))
        assert entropy(1.0) == 0.0
        assert entropy(-1.0) == 0.0
        with pytest.raises(ParameterError):
            entropy(1.5)

    def test_high_temperature_maximum_at_zero(self):
        grid = np.linspace(-0.99, 0.99, 199)
        values = rate_function_F(0.9, grid)
        assert rate_function_F(0.9, 0.0) == pytest.approx(0.0, abs=1e-15)
        assert np.all(values[np.abs(grid) > 1e-9] < 0.0)

    def test_low_temperature_maximum_at_m_star(self):
        m_star = solve_m_star(1.3)
        grid = np.linspace(-0.999, 0.999, 999)
        assert rate_function_F(1.3, m_star) >= np.max(rate_function_F(1.3, grid)) - 1e-12
        assert rate_function_F(1.3, m_star) == pytest.approx(rate_function_F(1.3, -m_star))

    def test_log_cosh_deviation_bounds(self):
        y = np.linspace(-5.0, 5.0, 10001)
        g = log_cosh_deviation(y)
        assert np.all(g <= 1e-15)
        assert np.all(g >= -y ** 4 / 12.0 - 1e-15)


class TestClassification:

    def test_high_temperature(self):
        result = classify_minimizers(ModelParams(beta=0.5, alpha=0.2, n_spins=80, n_blocks=8))
        assert result.regime == REGIME_HIGH
        assert result.m_star == 0.0
        assert len(result.minimizers) == 1
        assert result.verified
        assert result.hessian_min_eigenvalue > 0.0

    def test_low_temperature(self):
        result = classify_minimizers(ModelParams(beta=0.8, alpha=0.25, n_spins=60, n_blocks=6))
        assert result.regime == REGIME_LOW
        assert result.verified
        np.testing.assert_allclose(result.minimizers[0], -result.minimizers[1])
        assert result.grad_residual < 1e-10
        assert result.hessian_min_eigenvalue > 0.0

    def test_critical_line_is_flagged(self):
        result = classify_minimizers(ModelParams(beta=0.6, alpha=0.2, n_spins=60, n_blocks=6))
        assert result.regime == REGIME_CRITICAL
        assert result.notes

    def test_outside_the_cone(self):
        with pytest.raises(ParameterError):
            classify_minimizers(ModelParams(beta=0.5, alpha=0.0, n_spins=60, n_blocks=6, strict=False))

    def test_minimizer_sign(self):
        params = ModelParams(beta=0.8, alpha=0.25, n_spins=60, n_blocks=6)
        np.testing.assert_array_equal(minimizer_vector(params, -1), -minimizer_vector(params))
