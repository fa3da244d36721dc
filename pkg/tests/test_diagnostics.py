"""
Tests for autocorrelation time, effective sample size and R-hat
"""

import os
import sys

import numpy as np
import pytest
from scipy.signal import lfilter

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

# Import after setting up path
from errors import DiagnosticsError
from sampler.diagnostics import (
    autocorrelation,
    diagnostics,
    effective_sample_size,
    integrated_autocorrelation_time,
    multi_chain_rhat,
    split_rhat,
)


def ar1(phi, n, seed=0):
    noise = np.random.default_rng(seed).standard_normal(n)
    return lfilter([1.0], [1.0, -phi], noise)


def test_autocorrelation_starts_at_one():
    rho = autocorrelation(ar1(0.5, 5000))
    assert rho[0] == pytest.approx(1.0)
    assert rho[1] == pytest.approx(0.5, abs=0.05)


@pytest.mark.parametrize("phi", [0.0, 0.5, 0.8])
def test_ar1_autocorrelation_time(phi):
    expected = (1.0 + phi) / (1.0 - phi)
    tau = integrated_autocorrelation_time(ar1(phi, 200_000, seed=1))
    assert tau == pytest.approx(expected, rel=0.1)


def test_constant_series_counts_as_one_draw():
    x = np.full(500, 0.25)
    assert integrated_autocorrelation_time(x) == 500.0
    assert effective_sample_size(x) == 1.0
    result = diagnostics(np.column_stack([x, ar1(0.0, 500)]))
    assert result.degenerate.tolist() == [True, False]
    assert result.ess[0] == 1.0


def test_too_few_samples():
    with pytest.raises(DiagnosticsError):
        diagnostics(np.zeros(99))


def test_rhat_of_a_stationary_chain():
    x = ar1(0.5, 20_000, seed=2)
    assert split_rhat(x) == pytest.approx(1.0, abs=0.02)
    chains = [ar1(0.5, 20_000, seed=s) for s in range(3, 7)]
    assert multi_chain_rhat(chains) == pytest.approx(1.0, abs=0.02)


def test_rhat_flags_disagreeing_chains():
    x = ar1(0.0, 2000, seed=3)
    drifted = np.concatenate([x[:1000], x[1000:] + 5.0])
    assert split_rhat(drifted) > 1.5
    assert multi_chain_rhat([x, x + 5.0]) > 1.5


def test_diagnostics_shapes():
    samples = np.column_stack([ar1(0.3, 1000, seed=s) for s in range(3)])
    result = diagnostics(samples)
    assert result.tau.shape == result.ess.shape == result.rhat.shape == (3,)
    np.testing.assert_allclose(result.ess, 1000 / result.tau)
    assert set(result.to_dict()) == {"tau", "ess", "rhat", "degenerate"}
