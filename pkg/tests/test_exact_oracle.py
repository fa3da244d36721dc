"""
Tests for exact enumeration laws and the Hubbard-Stratonovich identity
"""

import math
import os
import sys
import tracemalloc

import numpy as np
import pytest
from scipy.special import comb, logsumexp

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

# Import after setting up path
from errors import BudgetExceededError, ConditioningError, ParameterError
from model.core import ModelParams
from model.landscape import solve_m_star
from oracle.exact import (
    conditional_law,
    dump_csv,
    exact_law,
    exact_moments,
    hs_density_check,
    hs_normaliser,
    marginal,
    n_lattice_states,
    spin_level_law,
    total_variation,
)
from utils.io import read_csv
import logging

# Keep test output quiet
logging.getLogger().setLevel(logging.ERROR)

ORACLE_SIZES = [(6, 1), (8, 2), (12, 3), (12, 4), (16, 4)]


@pytest.mark.parametrize("n,s", ORACLE_SIZES)
@pytest.mark.parametrize("beta,alpha", [(0.5, 0.2), (0.8, 0.25)])
def test_lattice_and_spin_level_laws_agree(n, s, beta, alpha):
    params = ModelParams(beta=beta, alpha=alpha, n_spins=n, n_blocks=s)
    lattice = exact_law(params)
    spins = spin_level_law(params)
    assert total_variation(lattice, spins) < 1e-12
    assert lattice.log_Z == pytest.approx(spins.log_Z, abs=1e-12)


def test_support_ordering_and_normalisation():
    params = ModelParams(beta=0.5, alpha=0.2, n_spins=12, n_blocks=3)
    law = exact_law(params)
    assert len(law) == n_lattice_states(params) == 125
    np.testing.assert_array_equal(law.counts[0], [0, 0, 0])
    np.testing.assert_array_equal(law.counts[1], [0, 0, 1])
    np.testing.assert_array_equal(law.counts[-1], [4, 4, 4])
    assert law.probs.sum() == pytest.approx(1.0, abs=1e-14)


def test_global_flip_symmetry():
    law = exact_law(ModelParams(beta=0.8, alpha=0.25, n_spins=15, n_blocks=3))
    np.testing.assert_allclose(law.log_probs, law.log_probs[::-1], atol=1e-12)
    mean, _ = exact_moments(law, 3)
    np.testing.assert_allclose(mean, 0.0, atol=1e-14)


def test_worker_count_does_not_change_the_law():
    params = ModelParams(beta=0.5, alpha=0.2, n_spins=20, n_blocks=4)
    serial = exact_law(params)
    parallel = exact_law(params, threads=2)
    np.testing.assert_array_equal(serial.counts, parallel.counts)
    np.testing.assert_array_equal(serial.log_probs, parallel.log_probs)


def test_curie_weiss_single_block():
    params = ModelParams(beta=0.5, alpha=0.2, n_spins=10, n_blocks=1)
    law = exact_law(params)
    n = np.arange(11)
    m = (2.0 * n - 10) / 10
    weights = comb(10, n) * np.exp(0.5 * 10 * params.theta * m * m)
    np.testing.assert_allclose(law.probs, weights / weights.sum(), rtol=1e-12)


def test_independent_blocks_are_uncorrelated():
    params = ModelParams(beta=0.5, alpha=0.0, n_spins=12, n_blocks=3, strict=False)
    _, cov = exact_moments(exact_law(params), 3)
    off_diagonal = cov[~np.eye(3, dtype=bool)]
    np.testing.assert_allclose(off_diagonal, 0.0, atol=1e-14)


def test_budget():
    params = ModelParams(beta=0.5, alpha=0.2, n_spins=40, n_blocks=4)
    with pytest.raises(BudgetExceededError) as excinfo:
        exact_law(params, budget=1000)
    assert excinfo.value.n_states == 11 ** 4
    with pytest.raises(BudgetExceededError):
        spin_level_law(params)


def test_marginals_are_cyclically_invariant():
    law = exact_law(ModelParams(beta=0.5, alpha=0.2, n_spins=15, n_blocks=3))
    first = marginal(law, 1)
    assert first.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(marginal(law, 2), first, atol=1e-15)
    np.testing.assert_allclose(first, first[::-1], atol=1e-15)
    with pytest.raises(ParameterError):
        marginal(law, 4)


def test_moments_dimension():
    law = exact_law(ModelParams(beta=0.5, alpha=0.2, n_spins=12, n_blocks=3))
    with pytest.raises(ParameterError):
        exact_moments(law, 4)


def test_conditional_law():
    params = ModelParams(beta=0.8, alpha=0.25, n_spins=12, n_blocks=3)
    law = exact_law(params)
    center = np.full(3, 0.5)
    conditioned = conditional_law(law, center, 0.6)
    assert conditioned.probs.sum() == pytest.approx(1.0)
    assert np.all(np.linalg.norm(conditioned.support - center, axis=1) <= 0.6 + 1e-12)
    assert len(conditioned) < len(law)
    with pytest.raises(ConditioningError):
        conditional_law(law, np.full(3, 0.1), 0.01)


LOW_36 = ModelParams(beta=0.8, alpha=0.25, n_spins=36, n_blocks=3)


def _state_index(law):
    base = law.block_size + 1
    weights = base ** np.arange(law.n_blocks - 1, -1, -1)
    return law.counts.astype(np.int64) @ weights


def test_phase_balls_reconstitute_the_law():
    law = exact_law(LOW_36)
    m_star = solve_m_star(LOW_36.theta)
    radius = 0.5 * m_star * math.sqrt(3)
    plus = conditional_law(law, np.full(3, m_star), radius)
    minus = conditional_law(law, np.full(3, -m_star), radius)
    plus_mass = math.exp(plus.log_Z - law.log_Z)
    minus_mass = math.exp(minus.log_Z - law.log_Z)
    assert plus_mass == pytest.approx(minus_mass, rel=1e-10)

    rebuilt = np.zeros(len(law))
    rebuilt[_state_index(plus)] += plus_mass * plus.probs
    rebuilt[_state_index(minus)] += minus_mass * minus.probs
    inside = rebuilt > 0.0
    assert not np.any(np.isin(_state_index(plus), _state_index(minus)))
    np.testing.assert_allclose(rebuilt[inside], law.probs[inside], rtol=1e-10)
    assert plus_mass + minus_mass + law.probs[~inside].sum() == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(minus.probs[::-1], plus.probs, rtol=1e-10)


@pytest.mark.parametrize("n_spins", [36, 72])
def test_conditional_mean_is_near_m_star(n_spins):
    params = LOW_36.with_size(n_spins)
    m_star = solve_m_star(params.theta)
    plus = conditional_law(exact_law(params), np.full(3, m_star), 0.5 * m_star * math.sqrt(3))
    mean, _ = exact_moments(plus, 3)
    np.testing.assert_allclose(mean, mean[0], atol=1e-12)
    assert abs(mean[0] - m_star) < 2.0 * params.n_blocks / params.n_spins


@pytest.mark.parametrize("grid,vary", [
    ([0.5, 0.6, 0.7, 0.8, 0.9], "beta"),
    ([0.05, 0.1, 0.15, 0.2, 0.24], "alpha"),
])
def test_log_partition_grows_with_the_couplings(grid, vary):
    log_zs = []
    for value in grid:
        couplings = {"beta": 0.5, "alpha": 0.2, vary: value}
        log_zs.append(exact_law(ModelParams(n_spins=12, n_blocks=3, **couplings)).log_Z)
    assert np.all(np.diff(log_zs) > 0.0)


def test_total_variation_needs_the_same_support():
    a = exact_law(ModelParams(beta=0.5, alpha=0.2, n_spins=12, n_blocks=3))
    b = exact_law(ModelParams(beta=0.5, alpha=0.2, n_spins=12, n_blocks=4))
    with pytest.raises(ParameterError):
        total_variation(a, b)


HS_POINTS = np.random.default_rng(2024).normal(scale=3.0, size=20)


@pytest.mark.parametrize("x", HS_POINTS)
@pytest.mark.parametrize("method", ["quadrature", "closed"])
def test_hubbard_stratonovich_density_single_block(x, method):
    params = ModelParams(beta=0.5, alpha=0.2, n_spins=16, n_blocks=1)
    density = hs_density_check(params, np.array([x]), method=method)
    assert density.rhs == pytest.approx(density.lhs, rel=1e-8)


@pytest.mark.parametrize("params,x", [
    (ModelParams(beta=0.5, alpha=0.2, n_spins=12, n_blocks=2), [0.3, -0.2]),
    (ModelParams(beta=0.8, alpha=0.25, n_spins=12, n_blocks=3), [0.5, 0.4, -0.1]),
])
def test_hubbard_stratonovich_density(params, x):
    density = hs_density_check(params, np.array(x))
    assert density.rhs == pytest.approx(density.lhs, rel=1e-8)


def test_normaliser_methods_agree():
    params = ModelParams(beta=0.8, alpha=0.25, n_spins=12, n_blocks=2)
    law = exact_law(params)
    closed = hs_normaliser(params, law, method="closed")
    numeric = hs_normaliser(params, law, method="quadrature")
    assert numeric == pytest.approx(closed, abs=1e-6)


def test_normaliser_needs_positive_definite_coupling():
    params = ModelParams(beta=0.2, alpha=0.2, n_spins=8, n_blocks=4, strict=False)
    with pytest.raises(ParameterError):
        hs_normaliser(params, method="closed")
    with pytest.raises(ParameterError):
        hs_normaliser(ModelParams(beta=0.5, alpha=0.2, n_spins=12, n_blocks=3), method="quadrature")


def test_dump_csv(tmp_path):
    law = exact_law(ModelParams(beta=0.5, alpha=0.2, n_spins=8, n_blocks=2))
    path = tmp_path / "law.csv"
    assert dump_csv(law, path) == 25
    header, rows = read_csv(path)
    assert header == ["m_1", "m_2", "log_prob"]
    assert len(rows) == 25
    assert float(rows[0][0]) == -1.0
    assert math.isclose(float(rows[0][2]), law.log_probs[0], rel_tol=1e-15)


@pytest.mark.slow
def test_enumeration_at_the_budget_keeps_memory_near_the_result():
    params = ModelParams(beta=0.5, alpha=0.2, n_spins=72, n_blocks=8)
    assert n_lattice_states(params) == 10 ** 8
    tracemalloc.start()
    try:
        law = exact_law(params)
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    result_bytes = law.counts.nbytes + law.log_probs.nbytes
    assert law.counts.dtype == np.uint8
    assert peak < 1.25 * result_bytes
    assert float(logsumexp(law.log_probs)) == pytest.approx(0.0, abs=1e-9)
    np.testing.assert_array_equal(law.counts[-1], np.full(8, 9))
