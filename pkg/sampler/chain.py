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

Seeded heat-bath sampler over per-block plus counts

A move picks a uniformly random spin, which sits in block k with probability
1/s_N and is a +1 spin with probability n_k / B, and redraws it from its exact
conditional law given all other spins. Since H_N depends on the spins only
through the counts, the move acts on the counts alone:

    n_k -> n_k + 1 with probability q_up   = (B - n_k)/B * expit(2 f_k + d A_kk)
    n_k -> n_k - 1 with probability q_down = n_k/B * expit(-(2 f_k - d A_kk))

with local fields f = A m, d = 2/B and A_kk the diagonal of A. One uniform u
decides the move: up on [0, q_up), down on [1 - q_down, 1), stay otherwise.

"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
from numba import njit

from collector.metrics import get_counter
from errors import ParameterError
from model.core import BlockCounts, MagnetizationVector, magnetization_from_counts
from model.spectral import apply
from utils.io import write_binary_frames, write_csv

logger = logging.getLogger(__name__)

INIT_ALL_PLUS = "all_plus"
INIT_ALL_MINUS = "all_minus"
INIT_UNIFORM = "uniform_random"
INIT_FROM_VECTOR = "from_vector"
INIT_MODES = (INIT_ALL_PLUS, INIT_ALL_MINUS, INIT_UNIFORM, INIT_FROM_VECTOR)


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = 0
    burn_in_sweeps: int = 100
    thinning_sweeps: int = 1
    n_samples: int = 1000
    init: str = INIT_ALL_PLUS
    init_vector: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.n_samples < 1:
            raise ParameterError(f"n_samples must be at least 1, got {self.n_samples}")
        if self.thinning_sweeps < 1:
            raise ParameterError(f"thinning_sweeps must be at least 1, got {self.thinning_sweeps}")
        if self.burn_in_sweeps < 0:
            raise ParameterError(f"burn_in_sweeps must be nonnegative, got {self.burn_in_sweeps}")
        if not 0 <= self.seed < 2 ** 64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.init not in INIT_MODES:
            raise ParameterError(f"init must be one of {INIT_MODES}, got {self.init!r}")
        if self.init == INIT_FROM_VECTOR and self.init_vector is None:
            raise ParameterError("init=from_vector needs init_vector")
        if self.init_vector is not None:
            object.__setattr__(self, "init_vector", tuple(float(v) for v in self.init_vector))

    def to_dict(self):
        return asdict(self)


@dataclass
class ChainState:
    counts: BlockCounts
    cached_m: MagnetizationVector
    rng_state: Optional[dict] = None
    sweep_index: int = 0

    def check_consistency(self):
        expected = magnetization_from_counts(self.counts.plus_counts, self.counts.block_size)
        if not np.array_equal(expected, self.cached_m.values):
            raise RuntimeError("cached magnetization out of sync with block counts")


@dataclass
class ChainSamples:
    """Samples of one replica: sweep indices and block magnetizations (rows)"""

    sweeps: np.ndarray
    values: np.ndarray
    replica: Optional[int]
    seed: int
    final_state: Optional[ChainState] = field(default=None, repr=False)

    @property
    def n_blocks(self):
        return self.values.shape[1]


class MoveProbabilities(NamedTuple):
    up: float
    down: float


@njit(cache=True)
def _expit(x):
    if x >= 0.0:
        return 1.0 / (1.0 + np.exp(-x))
    z = np.exp(x)
    return z / (1.0 + z)


@njit(cache=True)
def _self_coupling(beta, alpha, k, s):
    # A_kk picks up alpha from each neighbour that coincides with k itself
    coupling = beta
    if (k + s - 1) % s == k:
        coupling += alpha
    if (k + 1) % s == k:
        coupling += alpha
    return coupling


@njit(cache=True)
def _move_probabilities(counts, local_field, k, block_size, beta, alpha):
    s = counts.shape[0]
    n = counts[k]
    step = 2.0 / block_size
    a_kk = _self_coupling(beta, alpha, k, s)
    q_up = (block_size - n) / block_size * _expit(2.0 * local_field[k] + step * a_kk)
    q_down = n / block_size * _expit(-(2.0 * local_field[k] - step * a_kk))
    return q_up, q_down


@njit(cache=True)
def _apply_move(counts, local_field, k, direction, block_size, beta, alpha):
    s = counts.shape[0]
    counts[k] += direction
    shift = direction * 2.0 / block_size
    local_field[k] += beta * shift
    local_field[(k + s - 1) % s] += alpha * shift
    local_field[(k + 1) % s] += alpha * shift


@njit(cache=True)
def _update_block(counts, local_field, k, u, block_size, beta, alpha):
    q_up, q_down = _move_probabilities(counts, local_field, k, block_size, beta, alpha)
    if u < q_up:
        _apply_move(counts, local_field, k, 1, block_size, beta, alpha)
        return 1
    if u >= 1.0 - q_down:
        _apply_move(counts, local_field, k, -1, block_size, beta, alpha)
        return -1
    return 0


@njit(cache=True)
def _run_updates(counts, local_field, blocks, uniforms, block_size, beta, alpha):
    for t in range(blocks.shape[0]):
        _update_block(counts, local_field, blocks[t], uniforms[t], block_size, beta, alpha)


def _local_field(params, counts):
    return apply(params.spec, magnetization_from_counts(counts, params.block_size))


def _check_block(params, k):
    if int(k) != k or not 1 <= k <= params.n_blocks:
        raise ParameterError(f"block index {k} out of range 1..{params.n_blocks}")
    return int(k) - 1


def conditional_plus_probability(params, m_minus, k):
    """
    P(tagged spin in block k is +1 | all other spins)

    m_minus is the magnetization with the tagged spin set to -1.
    """
    index = _check_block(params, k)
    m_minus = np.asarray(m_minus, dtype=float)
    f = apply(params.spec, m_minus)
    a_kk = _self_coupling(params.beta, params.alpha, index, params.n_blocks)
    return float(_expit(2.0 * f[index] + 2.0 / params.block_size * a_kk))


def transition_probabilities(params, counts, k):
    """(q_up, q_down) of a heat-bath move in block k"""
    index = _check_block(params, k)
    counts = np.asarray(counts, dtype=np.int64)
    q_up, q_down = _move_probabilities(counts, _local_field(params, counts), index,
                                       params.block_size, float(params.beta), float(params.alpha))
    return MoveProbabilities(float(q_up), float(q_down))


def state_from_counts(params, counts, rng_state=None, sweep_index=0):
    block_counts = BlockCounts(counts, params.block_size)
    return ChainState(block_counts, block_counts.to_magnetization(), rng_state, sweep_index)


def single_site_update(params, state, k, u):
    """One heat-bath move in block k (1-based) driven by the uniform u; returns a new state"""
    index = _check_block(params, k)
    if not 0.0 <= u < 1.0:
        raise ParameterError(f"u must lie in [0, 1), got {u}")
    counts = np.array(state.counts.plus_counts, dtype=np.int64)
    local_field = _local_field(params, counts)
    _update_block(counts, local_field, index, float(u), params.block_size, float(params.beta), float(params.alpha))
    return state_from_counts(params, counts, state.rng_state, state.sweep_index)


def replica_generator(seed, replica=None):
    """Counter-based stream for (seed, replica); independent of scheduling"""
    spawn_key = () if replica is None else (int(replica),)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=spawn_key)))


def initial_counts(params, config, rng):
    b, s = params.block_size, params.n_blocks
    if config.init == INIT_ALL_PLUS:
        return np.full(s, b, dtype=np.int64)
    if config.init == INIT_ALL_MINUS:
        return np.zeros(s, dtype=np.int64)
    if config.init == INIT_UNIFORM:
        return rng.binomial(b, 0.5, size=s).astype(np.int64)
    vector = np.asarray(config.init_vector, dtype=float)
    if vector.shape != (s,) or np.any(np.abs(vector) > 1.0):
        raise ParameterError(f"init_vector must have {s} entries in [-1, 1]")
    # halves round away from m = 0 so that v and -v start from mirrored counts
    raw = b * (1.0 + vector) / 2.0
    mirrored = b - np.floor(b * (1.0 - vector) / 2.0 + 0.5)
    counts = np.where(vector >= 0.0, np.floor(raw + 0.5), mirrored).astype(np.int64)
    snapped = magnetization_from_counts(counts, b)
    if not np.allclose(snapped, vector, rtol=0.0, atol=1e-12):
        logger.warning(f"init_vector {vector.tolist()} is off the lattice of spacing {2.0 / b:g}; "
                       f"starting from {snapped.tolist()}")
    return counts


def _sweep(params, counts, local_field, rng, n_sweeps):
    beta, alpha = float(params.beta), float(params.alpha)
    for _ in range(n_sweeps):
        blocks = rng.integers(0, params.n_blocks, size=params.n_spins)
        uniforms = rng.random(params.n_spins)
        _run_updates(counts, local_field, blocks, uniforms, params.block_size, beta, alpha)
        # refresh the incrementally updated fields to keep rounding drift out
        local_field[:] = _local_field(params, counts)
        if np.any(counts < 0) or np.any(counts > params.block_size):
            raise RuntimeError(f"block counts left [0, {params.block_size}]: {counts}")


def _iterate_chain(params, config, replica=None):
    rng = replica_generator(config.seed, replica)
    counts = initial_counts(params, config, rng)
    local_field = _local_field(params, counts)
    _sweep(params, counts, local_field, rng, config.burn_in_sweeps)
    sweep = config.burn_in_sweeps
    debug = logger.isEnabledFor(logging.DEBUG)
    for _ in range(config.n_samples):
        _sweep(params, counts, local_field, rng, config.thinning_sweeps)
        sweep += config.thinning_sweeps
        if debug:
            state_from_counts(params, counts).check_consistency()
        yield sweep, magnetization_from_counts(counts, params.block_size), counts, rng


def _count_work(params, config):
    sweeps = config.burn_in_sweeps + config.n_samples * config.thinning_sweeps
    get_counter("blockspin_sampler_sweeps", "Heat-bath sweeps performed").inc(sweeps)
    get_counter("blockspin_sampler_updates", "Heat-bath single-site updates performed").inc(sweeps * params.n_spins)


def run_chain(params, config, replica=None):
    """Stream of block magnetization samples; deterministic in (seed, replica)"""
    for _, m, _, _ in _iterate_chain(params, config, replica):
        yield MagnetizationVector(m, params.block_size)
    _count_work(params, config)


def sample_chain(params, config, replica=None):
    """Collect one replica into arrays"""
    sweeps = np.empty(config.n_samples, dtype=np.int64)
    values = np.empty((config.n_samples, params.n_blocks))
    counts = rng = None
    for i, (sweep, m, counts, rng) in enumerate(_iterate_chain(params, config, replica)):
        sweeps[i] = sweep
        values[i] = m
    _count_work(params, config)
    final = state_from_counts(params, counts, rng.bit_generator.state, int(sweeps[-1]))
    logger.debug(f"replica {replica}: {config.n_samples} samples, final m={final.cached_m.values.tolist()}")
    return ChainSamples(sweeps=sweeps, values=values, replica=replica, seed=config.seed, final_state=final)


def _sample_replica(params, config, replica):
    return sample_chain(params, config, replica)


def run_replicas(params, config, n_replicas, threads=1, first_replica=0):
    """Independent replicas first_replica..first_replica+n_replicas-1, in replica order"""
    replicas = list(range(first_replica, first_replica + n_replicas))
    logger.debug(f"running {n_replicas} replicas of {params} on {threads} workers")
    if threads > 1 and n_replicas > 1:
        with ProcessPoolExecutor(max_workers=min(threads, n_replicas)) as pool:
            results = list(pool.map(_sample_replica, [params] * n_replicas, [config] * n_replicas, replicas))
        _count_work(params, replace(config, n_samples=config.n_samples * n_replicas,
                                    burn_in_sweeps=config.burn_in_sweeps * n_replicas))
        return results
    return [sample_chain(params, config, replica) for replica in replicas]


def dump_samples(samples: List[ChainSamples], path, fmt="csv"):
    """Raw sample dump: CSV (sweep, m_1..m_s) or little-endian float64 frames"""
    sweeps = np.concatenate([c.sweeps for c in samples])
    values = np.concatenate([c.values for c in samples])
    if fmt == "csv":
        header = ["sweep"] + [f"m_{k}" for k in range(1, values.shape[1] + 1)]
        return write_csv(path, header, ([int(t)] + list(row) for t, row in zip(sweeps, values)))
    if fmt == "bin":
        write_binary_frames(path, np.column_stack([sweeps.astype(float), values]))
        return len(sweeps)
    raise ParameterError(f"unknown sample format {fmt!r}")
