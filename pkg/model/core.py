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

Model parameters, Hamiltonians and the magnetization lattice

Spins live in s_N equal blocks of N / s_N consecutive sites. The Gibbs
measure is proportional to exp(+H_N) under the symmetric Bernoulli reference
measure, and H_N depends on the spins only through the block magnetizations.

"""

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import gammaln

from errors import ParameterError
from model.spectral import CirculantSpec, apply, dense

logger = logging.getLogger(__name__)

LATTICE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ModelParams:
    """
    The tuple (beta, alpha, N, s_N)

    Strict mode enforces beta > 2 alpha > 0. Relaxed mode only requires
    nonnegative couplings, which admits the independent-blocks case alpha = 0.
    """

    beta: float
    alpha: float
    n_spins: int
    n_blocks: int
    strict: bool = True

    def __post_init__(self):
        for name in ("n_spins", "n_blocks"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ParameterError(f"{name} must be a positive integer, got {value}")
        if self.n_spins % self.n_blocks != 0:
            raise ParameterError(
                f"n_spins={self.n_spins} is not divisible by n_blocks={self.n_blocks}"
            )
        if not (math.isfinite(self.beta) and math.isfinite(self.alpha)):
            raise ParameterError(f"couplings must be finite, got beta={self.beta}, alpha={self.alpha}")
        if self.strict:
            if not self.beta > 2.0 * self.alpha > 0.0:
                raise ParameterError(
                    f"strict mode needs beta > 2 alpha > 0, got beta={self.beta}, alpha={self.alpha}"
                )
        elif self.beta < 0.0 or self.alpha < 0.0:
            raise ParameterError(f"couplings must be nonnegative, got beta={self.beta}, alpha={self.alpha}")

    @property
    def block_size(self):
        return self.n_spins // self.n_blocks

    @property
    def theta(self):
        """Total inverse temperature beta + 2 alpha"""
        return self.beta + 2.0 * self.alpha

    @property
    def spec(self):
        return CirculantSpec.from_params(self)

    def with_size(self, n_spins=None, n_blocks=None):
        """Same couplings at another system size"""
        return ModelParams(
            beta=self.beta,
            alpha=self.alpha,
            n_spins=self.n_spins if n_spins is None else n_spins,
            n_blocks=self.n_blocks if n_blocks is None else n_blocks,
            strict=self.strict,
        )

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True, eq=False)
class MagnetizationVector:
    """Block magnetizations; lattice mode pins every entry to the grid of its block size"""

    values: np.ndarray
    block_size: int = 0

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if values.ndim != 1:
            raise ParameterError(f"magnetization must be a vector, got shape {values.shape}")
        if np.any(np.abs(values) > 1.0 + LATTICE_TOLERANCE):
            raise ParameterError("magnetization entries must lie in [-1, 1]")
        if self.block_size:
            counts = self.block_size * (1.0 + values) / 2.0
            if np.any(np.abs(counts - np.round(counts)) > LATTICE_TOLERANCE * self.block_size):
                raise ParameterError(f"magnetization is not on the lattice of block size {self.block_size}")

    @property
    def on_lattice(self):
        return self.block_size > 0

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        return np.array_equal(self.values, np.asarray(other, dtype=float))

    def __repr__(self):
        return f"MagnetizationVector({self.values.tolist()})"


@dataclass(frozen=True, eq=False)
class BlockCounts:
    """Per-block counts of +1 spins"""

    plus_counts: np.ndarray
    block_size: int

    def __post_init__(self):
        counts = np.array(self.plus_counts, dtype=np.int64)
        counts.setflags(write=False)
        object.__setattr__(self, "plus_counts", counts)
        if np.any(counts < 0) or np.any(counts > self.block_size):
            raise ParameterError(f"plus counts must lie in [0, {self.block_size}]")

    def to_magnetization(self):
        return MagnetizationVector(magnetization_from_counts(self.plus_counts, self.block_size), self.block_size)

    @classmethod
    def from_magnetization(cls, m, block_size):
        return cls(counts_from_magnetization(m, block_size), block_size)


def magnetization_from_counts(counts, block_size):
    """m_k = 2 n_k / B - 1, written as (2 n_k - B) / B so that it is exactly odd in n_k"""
    counts = np.asarray(counts)
    return (2.0 * counts - block_size) / block_size


def counts_from_magnetization(m, block_size):
    m = np.asarray(m, dtype=float)
    counts = block_size * (1.0 + m) / 2.0
    rounded = np.round(counts)
    if np.any(np.abs(counts - rounded) > LATTICE_TOLERANCE * block_size) or np.any(np.abs(m) > 1.0 + LATTICE_TOLERANCE):
        raise ParameterError(f"magnetization {m} is not on the lattice of block size {block_size}")
    return rounded.astype(np.int64)


def _check_spins(params, sigma):
    sigma = np.asarray(sigma)
    if sigma.shape != (params.n_spins,):
        raise ParameterError(f"sigma must have length {params.n_spins}, got shape {sigma.shape}")
    if not np.all(np.abs(sigma) == 1):
        raise ParameterError("sigma entries must be +1 or -1")
    return sigma.astype(float)


def _block_sums(params, sigma):
    return _check_spins(params, sigma).reshape(params.n_blocks, params.block_size).sum(axis=1)


def hamiltonian_spins(params, sigma):
    """
    H_N(sigma) evaluated from the spin configuration

    The within-block double sum runs over all ordered pairs including i = j.
    The neighbour sum visits S_{k-1} and S_{k+1}, which coincide for two blocks
    and are the block itself for one block.
    """
    sums = _block_sums(params, sigma)
    scale = params.n_blocks / params.n_spins
    neighbours = np.roll(sums, 1) + np.roll(sums, -1)
    return float(0.5 * scale * (params.beta * np.dot(sums, sums) + params.alpha * np.dot(sums, neighbours)))


def block_magnetization(params, sigma):
    sums = _block_sums(params, sigma)
    counts = np.round((sums + params.block_size) / 2.0).astype(np.int64)
    return MagnetizationVector(magnetization_from_counts(counts, params.block_size), params.block_size)


def total_magnetization(params, sigma):
    """(1/N) sum_i sigma_i, the mean of the block magnetizations"""
    return float(np.mean(_check_spins(params, sigma)))


def hamiltonian_blocks(params, m):
    """H_N(m) = (1/2) (N / s_N) m^T A m"""
    m = np.asarray(m, dtype=float)
    if m.shape[-1:] != (params.n_blocks,):
        raise ParameterError(f"magnetization must have {params.n_blocks} entries, got shape {m.shape}")
    energy = 0.5 * params.block_size * np.sum(m * apply(params.spec, m), axis=-1)
    return float(energy) if np.ndim(energy) == 0 else energy


def interaction_matrix(params):
    return dense(params.spec)


def lattice_grid(params):
    """The block magnetization grid -1 + 2 k s_N / N, k = 0..N/s_N"""
    b = params.block_size
    return (2.0 * np.arange(b + 1) - b) / b


def log_prior_table(block_size):
    """
    log(2^-B binom(B, n)) for n = 0..B

    The two gammaln terms are added before subtracting, so entries n and B - n
    agree bit for bit.
    """
    n = np.arange(block_size + 1)
    return gammaln(block_size + 1) - (gammaln(n + 1) + gammaln(block_size - n + 1)) - block_size * math.log(2.0)


def log_prior_weight(params, m_k):
    """Log a-priori weight of a single block magnetization value"""
    b = params.block_size
    n = b * (1.0 + m_k) / 2.0
    if abs(n - round(n)) > LATTICE_TOLERANCE * b or not -LATTICE_TOLERANCE <= n <= b + LATTICE_TOLERANCE:
        raise ParameterError(f"m_k={m_k} is not on the lattice of block size {b}")
    return float(log_prior_table(b)[int(round(n))])
