"""
Tests for the block-chain transfer matrix
"""

import itertools
import math
import os
import sys

import numpy as np
import pytest
from scipy.special import logsumexp

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

# Import after setting up path
from errors import ParameterError
from model.core import ModelParams, log_prior_table
from oracle.exact import exact_law, exact_moments, marginal
from oracle.transfer import (
    ChainSpec,
    alphabet_weights,
    build_transfer_matrix,
    chain_marginal,
    correlation_length,
    dump_marginal_csv,
    dump_two_point_csv,
    log_partition,
    spectral_gap,
    total_magnetization_stats,
    two_point_function,
)
from utils.io import read_csv
import logging

# Keep test output quiet
logging.getLogger().setLevel(logging.ERROR)


@pytest.mark.parametrize("block_size", [1, 2, 3, 4])
@pytest.mark.parametrize("s", [1, 2, 3, 4, 5, 6])
def test_periodic_partition_function_matches_enumeration(block_size, s):
    params = ModelParams(beta=0.8, alpha=0.25, n_spins=block_size * s, n_blocks=s)
    chain = ChainSpec.from_params(params)
    log_z = exact_law(params).log_Z
    assert log_partition(chain) == pytest.approx(log_z, rel=1e-10, abs=1e-12)


def test_free_boundary_matches_brute_force():
    chain = ChainSpec(block_size=3, beta=0.5, alpha=0.2, n_blocks=4)
    values = chain.alphabet
    prior = log_prior_table(3)
    terms = []
    for index in itertools.product(range(4), repeat=4):
        m = values[list(index)]
        energy = 0.5 * 3 * 0.5 * np.sum(m * m) + 0.2 * 3 * np.sum(m[:-1] * m[1:])
        terms.append(energy + prior[list(index)].sum())
    assert log_partition(chain, boundary="free") == pytest.approx(logsumexp(terms), rel=1e-12)


def test_unknown_boundary():
    with pytest.raises(ParameterError):
        log_partition(ChainSpec(2, 0.5, 0.2, 3), boundary="twisted")


def test_marginal_matches_enumeration():
    params = ModelParams(beta=0.5, alpha=0.2, n_spins=16, n_blocks=4)
    chain = ChainSpec.from_params(params)
    np.testing.assert_allclose(chain_marginal(chain, 1), marginal(exact_law(params), 1), atol=1e-12)
    with pytest.raises(ParameterError):
        chain_marginal(chain, 5)


def test_two_point_function_matches_enumeration():
    params = ModelParams(beta=0.5, alpha=0.2, n_spins=20, n_blocks=5)
    _, cov = exact_moments(exact_law(params), 5)
    chain = ChainSpec.from_params(params)
    for r in range(5):
        assert two_point_function(chain, r) == pytest.approx(cov[0, r], abs=1e-12)


@pytest.mark.parametrize("alpha", [0.2, 0.7, 1.5])
def test_block_size_one_is_the_1d_ising_chain(alpha):
    t = math.tanh(alpha)
    chain = ChainSpec(block_size=1, beta=0.0, alpha=alpha, n_blocks=12)
    for r in range(1, 6):
        assert two_point_function(chain, r, infinite=True) == pytest.approx(t ** r, abs=1e-12)
        assert two_point_function(chain, r) == pytest.approx((t ** r + t ** (12 - r)) / (1.0 + t ** 12), abs=1e-12)
    assert correlation_length(chain) == pytest.approx(-1.0 / math.log(t))
    assert spectral_gap(chain) == pytest.approx(math.cosh(alpha) - math.sinh(alpha))


def test_total_magnetization_stats():
    variances = []
    for s in (8, 16, 32, 64):
        stats = total_magnetization_stats(ChainSpec(block_size=10, beta=0.5, alpha=0.2, n_blocks=s))
        assert abs(stats.mean) < 1e-14
        assert stats.correlation_length > 0.0
        variances.append(stats.variance_per_block)
    assert max(variances) <= 1.05 * variances[0]
    assert variances[-1] == pytest.approx(variances[-2], rel=1e-8)


def test_transfer_matrix_is_symmetric_and_positive():
    transfer = build_transfer_matrix(ChainSpec(block_size=6, beta=0.8, alpha=0.25, n_blocks=4))
    assert transfer.size == 7
    np.testing.assert_allclose(transfer.entries, transfer.entries.T)
    assert np.all(transfer.entries > 0.0)


def test_alphabet_weight_conventions():
    chain = ChainSpec(block_size=4, beta=0.5, alpha=0.2, n_blocks=3)
    np.testing.assert_array_equal(alphabet_weights(chain), log_prior_table(4))
    multiset = np.exp(alphabet_weights(chain, "multiset")) * 16
    np.testing.assert_allclose(multiset, [1, 4, 10, 4, 1])
    with pytest.raises(ParameterError):
        ChainSpec(block_size=4, beta=0.5, alpha=0.2, n_blocks=3, convention="other")


def test_invalid_chain():
    with pytest.raises(ParameterError):
        ChainSpec(block_size=0, beta=0.5, alpha=0.2, n_blocks=3)


def test_csv_dumps(tmp_path):
    chain = ChainSpec(block_size=4, beta=0.5, alpha=0.2, n_blocks=6)
    assert dump_marginal_csv(chain, tmp_path / "marginal.csv") == 5
    assert dump_two_point_csv(chain, tmp_path / "two_point.csv") == 4
    header, rows = read_csv(tmp_path / "two_point.csv")
    assert header == ["distance", "correlation", "infinite_volume"]
    assert rows[0, 0] == 0.0
