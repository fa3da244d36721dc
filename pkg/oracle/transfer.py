# Copyright 2025 Timandes White
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""

Transfer matrices for the fixed-block-size chain

With B spins per block the block magnetizations form a periodic
nearest-neighbour chain over the finite alphabet {(2n - B) / B : n = 0..B}
with a-priori weights rho. The bond weight
exp(alpha B m m' + (beta B / 4)(m^2 + m'^2)) is split symmetrically together
with sqrt(rho) on both ends, so T stays symmetric.

"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from errors import ParameterError
from model.core import log_prior_table, magnetization_from_counts
from utils.io import write_csv

logger = logging.getLogger(__name__)

CONVENTION_BINOMIAL = "binomial"
CONVENTION_MULTISET = "multiset"


@dataclass(frozen=True)
class ChainSpec:
    """Periodic block chain with block_size spins per block and n_blocks blocks"""

    block_size: int
    beta: float
    alpha: float
    n_blocks: int
    convention: str = CONVENTION_BINOMIAL

    def __post_init__(self):
        for name in ("block_size", "n_blocks"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ParameterError(f"{name} must be a positive integer, got {value}")
        if self.convention not in (CONVENTION_BINOMIAL, CONVENTION_MULTISET):
            raise ParameterError(f"unknown weight convention {self.convention!r}")

    @classmethod
    def from_params(cls, params, convention=CONVENTION_BINOMIAL):
        return cls(params.block_size, params.beta, params.alpha, params.n_blocks, convention)

    def with_blocks(self, n_blocks):
        return ChainSpec(self.block_size, self.beta, self.alpha, n_blocks, self.convention)

    @property
    def alphabet(self):
        return magnetization_from_counts(np.arange(self.block_size + 1), self.block_size)


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    entries: np.ndarray
    values: np.ndarray
    log_weights: np.ndarray

    @property
    def size(self):
        return self.entries.shape[0]


class MagnetizationStats(NamedTuple):
    mean: float
    variance_per_block: float
    correlation_length: float
    spectral_gap: float


def alphabet_weights(chain, convention=None):
    """
    Log a-priori weights over the alphabet, indexed by plus count n

    "binomial" is the count binom(B, n) / 2^B of spin configurations.
    "multiset" is binom(B + l - 1, l) / 2^B with l = min(n, B - n) minus spins
    mirrored onto both signs; it is not normalised and is kept for comparison only.
    """
    convention = convention or chain.convention
    b = chain.block_size
    if convention == CONVENTION_BINOMIAL:
        return log_prior_table(b)
    if convention == CONVENTION_MULTISET:
        n = np.arange(b + 1)
        l = np.minimum(n, b - n)
        return gammaln(b + l) - (gammaln(l + 1) + gammaln(b)) - b * math.log(2.0)
    raise ParameterError(f"unknown weight convention {convention!r}")


def build_transfer_matrix(chain):
    b = chain.block_size
    values = chain.alphabet
    log_weights = alphabet_weights(chain)
    site = 0.25 * chain.beta * b * values ** 2 + 0.5 * log_weights
    log_entries = chain.alpha * b * np.outer(values, values) + site[:, None] + site[None, :]
    return TransferMatrix(entries=np.exp(log_entries), values=values, log_weights=log_weights)


def _spectrum(transfer):
    """Eigenpairs sorted by decreasing magnitude"""
    eigenvalues, vectors = np.linalg.eigh(transfer.entries)
    order = np.argsort(-np.abs(eigenvalues), kind="stable")
    return eigenvalues[order], vectors[:, order]


def _normalised(transfer):
    top = _spectrum(transfer)[0][0]
    return transfer.entries / top, float(top)


def log_partition(chain, boundary="periodic"):
    """log trace(T^s) for the periodic chain, or log u^T T^(s-1) u with open ends"""
    transfer = build_transfer_matrix(chain)
    normalised, top = _normalised(transfer)
    s = chain.n_blocks
    if boundary == "periodic":
        return s * math.log(top) + math.log(float(np.trace(np.linalg.matrix_power(normalised, s))))
    if boundary == "free":
        # open ends miss half of the on-site term that the bonds would otherwise supply
        end = np.exp(0.25 * chain.beta * chain.block_size * transfer.values ** 2 + 0.5 * transfer.log_weights)
        inner = end @ np.linalg.matrix_power(normalised, s - 1) @ end
        return (s - 1) * math.log(top) + math.log(float(inner))
    raise ParameterError(f"unknown boundary {boundary!r}")


def chain_marginal(chain, k):
    """P(m_k = a) over the alphabet; independent of k on the periodic chain"""
    if not 1 <= k <= chain.n_blocks:
        raise ParameterError(f"block index {k} out of range 1..{chain.n_blocks}")
    normalised, _ = _normalised(build_transfer_matrix(chain))
    diagonal = np.diag(np.linalg.matrix_power(normalised, chain.n_blocks))
    return diagonal / diagonal.sum()


def two_point_function(chain, r, infinite=False):
    """E[m_k m_{k+r}]; the infinite-volume value sums the spectral decomposition"""
    transfer = build_transfer_matrix(chain)
    if infinite:
        eigenvalues, vectors = _spectrum(transfer)
        overlaps = (vectors[:, 0] * transfer.values) @ vectors
        return float(np.sum(overlaps ** 2 * (eigenvalues / eigenvalues[0]) ** r))
    s = chain.n_blocks
    r = r % s
    normalised, _ = _normalised(transfer)
    d = np.diag(transfer.values)
    left = np.linalg.matrix_power(normalised, r)
    right = np.linalg.matrix_power(normalised, s - r)
    return float(np.trace(d @ left @ d @ right) / np.trace(np.linalg.matrix_power(normalised, s)))


def spectral_gap(chain):
    eigenvalues, _ = _spectrum(build_transfer_matrix(chain))
    if eigenvalues.size == 1:
        return float(eigenvalues[0])
    return float(eigenvalues[0] - abs(eigenvalues[1]))


def correlation_length(chain):
    """1 / log(lambda_1 / |lambda_2|) from the top two transfer eigenvalues"""
    eigenvalues, _ = _spectrum(build_transfer_matrix(chain))
    if eigenvalues.size == 1 or eigenvalues[1] == 0.0:
        return 0.0
    return 1.0 / math.log(eigenvalues[0] / abs(eigenvalues[1]))


def total_magnetization_stats(chain):
    """Mean and per-block variance of the total magnetization, plus the correlation length"""
    marginal = chain_marginal(chain, 1)
    mean = float(np.dot(chain.alphabet, marginal))
    variance = sum(two_point_function(chain, r) for r in range(chain.n_blocks))
    stats = MagnetizationStats(
        mean=mean,
        variance_per_block=float(variance),
        correlation_length=correlation_length(chain),
        spectral_gap=spectral_gap(chain),
    )
    logger.debug(f"chain {chain}: {stats}")
    return stats


def dump_marginal_csv(chain, path):
    marginal = chain_marginal(chain, 1)
    return write_csv(path, ["m", "probability"], zip(chain.alphabet, marginal))


def dump_two_point_csv(chain, path, max_distance=None):
    max_distance = chain.n_blocks // 2 if max_distance is None else max_distance
    rows = ((r, two_point_function(chain, r), two_point_function(chain, r, infinite=True))
            for r in range(max_distance + 1))
    return write_csv(path, ["distance", "correlation", "infinite_volume"], rows)
