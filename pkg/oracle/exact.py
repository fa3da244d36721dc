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

Exact finite-N laws by enumeration over the magnetization lattice

The law of m is enumerated on A_N^{s_N}, which has (B + 1)^s states for block
size B, instead of the 2^N spin configurations. States are ordered
lexicographically in the per-block plus counts, so the state with all counts
complemented (m -> -m) sits at the mirrored index.

"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import dblquad, quad
from scipy.special import logsumexp
from scipy.stats import multivariate_normal

from errors import BudgetExceededError, ConditioningError, ParameterError
from model.core import log_prior_table, magnetization_from_counts
from model.landscape import phi
from model.spectral import CirculantSpec, apply, dense
from utils.io import write_csv

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 10 ** 8
SPIN_LEVEL_MAX_SPINS = 24
CHUNK_STATES = 1 << 18


@dataclass(frozen=True, eq=False)
class ExactLaw:
    """Exact law of the block magnetization vector"""

    counts: np.ndarray
    block_size: int
    log_probs: np.ndarray
    log_Z: float

    @property
    def n_blocks(self):
        return self.counts.shape[1]

    @property
    def support(self):
        return magnetization_from_counts(self.counts, self.block_size)

    @property
    def probs(self):
        return np.exp(self.log_probs)

    def __len__(self):
        return self.counts.shape[0]


class HSDensity(NamedTuple):
    lhs: float
    rhs: float


def n_lattice_states(params):
    return (params.block_size + 1) ** params.n_blocks


def _log_weights(beta, alpha, n_blocks, block_size, counts):
    """(B/2) m^T A m + sum_k log prior(m_k) for rows of plus counts"""
    spec = CirculantSpec(n_blocks, beta, alpha)
    m = magnetization_from_counts(counts, block_size)
    energy = 0.5 * block_size * np.sum(m * apply(spec, m), axis=-1)
    return energy + np.sum(log_prior_table(block_size)[counts], axis=-1)


def _rest_counts(n_blocks, block_size, dtype):
    """Plus counts of blocks 2..s for every state, lexicographic"""
    base = block_size + 1
    n_rest = base ** (n_blocks - 1)
    rest = np.empty((n_rest, n_blocks - 1), dtype=dtype)
    for start in range(0, n_rest, CHUNK_STATES):
        stop = min(start + CHUNK_STATES, n_rest)
        index = np.unravel_index(np.arange(start, stop), (base,) * (n_blocks - 1))
        for column, values in enumerate(index):
            rest[start:stop, column] = values
    return rest


def _leading_log_weights(beta, alpha, n_blocks, block_size, leading, out=None):
    """Log weights of all states whose first block carries `leading` plus spins"""
    base = block_size + 1
    n_rest = base ** (n_blocks - 1)
    if out is None:
        out = np.empty(n_rest)
    counts = np.empty((min(CHUNK_STATES, n_rest), n_blocks), dtype=np.int64)
    for start in range(0, n_rest, CHUNK_STATES):
        stop = min(start + CHUNK_STATES, n_rest)
        chunk = counts[: stop - start]
        chunk[:, 0] = leading
        if n_blocks > 1:
            index = np.unravel_index(np.arange(start, stop), (base,) * (n_blocks - 1))
            for column, values in enumerate(index, start=1):
                chunk[:, column] = values
        out[start:stop] = _log_weights(beta, alpha, n_blocks, block_size, chunk)
    return out


def _chunked_logsumexp(values):
    partial = [logsumexp(values[start:start + CHUNK_STATES])
               for start in range(0, values.size, CHUNK_STATES)]
    return float(logsumexp(partial))


def exact_law(params, budget=DEFAULT_BUDGET, threads=1):
    """
    Exact law of m by enumerating the magnetization lattice

    The work is split over the value of the first block. Both output arrays are
    allocated once and each slice is filled in place; the result does not
    depend on the worker count.
    """
    n_states = n_lattice_states(params)
    if n_states > budget:
        raise BudgetExceededError(n_states, budget)
    b, s = params.block_size, params.n_blocks
    n_rest = (b + 1) ** (s - 1)
    logger.debug(f"enumerating {n_states} lattice states for {params} on {threads} workers")

    counts = np.empty((n_states, s), dtype=np.min_scalar_type(b))
    rest = _rest_counts(s, b, counts.dtype) if s > 1 else None
    for leading in range(b + 1):
        rows = counts[leading * n_rest:(leading + 1) * n_rest]
        rows[:, 0] = leading
        if rest is not None:
            rows[:, 1:] = rest
    del rest

    log_probs = np.empty(n_states)
    tasks = [(params.beta, params.alpha, s, b, leading) for leading in range(b + 1)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for leading, weights in enumerate(pool.map(_leading_log_weights, *zip(*tasks))):
                log_probs[leading * n_rest:(leading + 1) * n_rest] = weights
                del weights
    else:
        for leading, task in enumerate(tasks):
            _leading_log_weights(*task, out=log_probs[leading * n_rest:(leading + 1) * n_rest])

    log_Z = _chunked_logsumexp(log_probs)
    log_probs -= log_Z
    return ExactLaw(counts=counts, block_size=b, log_probs=log_probs, log_Z=log_Z)


def spin_level_law(params, chunk_bits=16):
    """Law of m from all 2^N spin configurations, the brute-force oracle"""
    n, s, b = params.n_spins, params.n_blocks, params.block_size
    if n > SPIN_LEVEL_MAX_SPINS:
        raise BudgetExceededError(2 ** n, 2 ** SPIN_LEVEL_MAX_SPINS)
    base = b + 1
    n_states = base ** s
    multiplicity = np.zeros(n_states, dtype=np.int64)
    energy = np.zeros(n_states)
    weights = base ** np.arange(s - 1, -1, -1)
    scale = s / n
    shifts = np.arange(n, dtype=np.uint64)
    chunk = 1 << min(chunk_bits, n)
    for start in range(0, 1 << n, chunk):
        configs = np.arange(start, start + chunk, dtype=np.uint64)
        bits = ((configs[:, None] >> shifts) & np.uint64(1)).astype(np.int64)
        sigma = 2 * bits - 1
        sums = sigma.reshape(-1, s, b).sum(axis=2).astype(float)
        neighbours = np.roll(sums, 1, axis=1) + np.roll(sums, -1, axis=1)
        h = 0.5 * scale * (params.beta * np.sum(sums * sums, axis=1) + params.alpha * np.sum(sums * neighbours, axis=1))
        index = bits.reshape(-1, s, b).sum(axis=2) @ weights
        multiplicity += np.bincount(index, minlength=n_states)
        energy[index] = h
    counts = np.stack(np.unravel_index(np.arange(n_states), (base,) * s), axis=1)
    log_weights = np.log(multiplicity) + energy - n * math.log(2.0)
    log_Z = float(logsumexp(log_weights))
    return ExactLaw(counts=counts.astype(np.min_scalar_type(b)), block_size=b, log_probs=log_weights - log_Z, log_Z=log_Z)


def total_variation(law_a, law_b):
    if law_a.counts.shape != law_b.counts.shape or not np.array_equal(law_a.counts, law_b.counts):
        raise ParameterError("laws live on different supports")
    return 0.5 * float(np.sum(np.abs(law_a.probs - law_b.probs)))


def exact_moments(law, d):
    """Exact mean and covariance of the first d block magnetizations"""
    if not 1 <= d <= law.n_blocks:
        raise ParameterError(f"d must lie in 1..{law.n_blocks}, got {d}")
    p = law.probs
    m = law.support[:, :d]
    mean = p @ m
    centred = m - mean
    cov = (centred * p[:, None]).T @ centred
    return mean, cov


def marginal(law, k):
    """Exact distribution of m_k over the block grid, k 1-based"""
    if not 1 <= k <= law.n_blocks:
        raise ParameterError(f"block index {k} out of range 1..{law.n_blocks}")
    column = law.counts[:, k - 1].astype(np.int64)
    return np.bincount(column, weights=law.probs, minlength=law.block_size + 1)


def conditional_law(law, center, radius):
    """Law restricted to the Euclidean ball {|m - center| <= radius}"""
    if not radius > 0:
        raise ParameterError(f"radius must be positive, got {radius}")
    center = np.asarray(center, dtype=float)
    if center.shape != (law.n_blocks,):
        raise ParameterError(f"center must have {law.n_blocks} entries")
    distance = np.linalg.norm(law.support - center, axis=1)
    mask = distance <= radius * (1.0 + 1e-12)
    if not np.any(mask):
        raise ConditioningError(f"no lattice state within {radius} of {center.tolist()}")
    log_mass = float(logsumexp(law.log_probs[mask]))
    return ExactLaw(
        counts=law.counts[mask],
        block_size=law.block_size,
        log_probs=law.log_probs[mask] - log_mass,
        log_Z=law.log_Z + log_mass,
    )


def _log_unnormalised_rhs(params, x):
    b = params.block_size
    return -b * phi(params.spec, np.asarray(x, dtype=float) / math.sqrt(b))


def hs_normaliser(params, law=None, method="auto"):
    """
    log z_N such that z_N exp(-(N/s) phi(x / sqrt(N/s))) is a probability density

    "quadrature" integrates numerically (s <= 2); "closed" uses
    z_N = sqrt(det A / (2 pi)^s) / Z_N from the enumerated partition function.
    """
    s, b = params.n_blocks, params.block_size
    if method == "auto":
        method = "quadrature" if s <= 2 else "closed"
    if method == "closed":
        if law is None:
            law = exact_law(params)
        sign, logdet = np.linalg.slogdet(dense(params.spec))
        if sign <= 0:
            raise ParameterError("Hubbard-Stratonovich transform needs a positive definite A")
        return 0.5 * logdet - 0.5 * s * math.log(2.0 * math.pi) - law.log_Z
    if method != "quadrature":
        raise ParameterError(f"unknown normalisation method {method!r}")
    if s > 2:
        raise ParameterError("quadrature normalisation is limited to s_N <= 2")
    spread = math.sqrt(float(np.max(1.0 / np.linalg.eigvalsh(dense(params.spec)))))
    limit = math.sqrt(b) + 14.0 * spread
    # peak value factored out to keep the integrand O(1); the mass sits near the diagonal
    grid = np.linspace(-math.sqrt(b), math.sqrt(b), 81)
    diagonal = np.array([_log_unnormalised_rhs(params, np.full(s, t)) for t in grid])
    peak = float(np.max(diagonal))
    modes = sorted({0.0, float(abs(grid[np.argmax(diagonal)])), -float(abs(grid[np.argmax(diagonal)]))})
    if s == 1:
        value, _ = quad(lambda t: math.exp(_log_unnormalised_rhs(params, [t]) - peak),
                        -limit, limit, points=modes, limit=400, epsabs=0.0, epsrel=1e-12)
    else:
        value, _ = dblquad(lambda u, t: math.exp(_log_unnormalised_rhs(params, [t, u]) - peak),
                           -limit, limit, -limit, limit, epsabs=0.0, epsrel=1e-10)
    return -(math.log(value) + peak)


def hs_density_check(params, x, law=None, method="auto"):
    """
    Density at x of sqrt(N/s) m + Z, Z ~ N(0, A^-1), computed two ways

    lhs mixes Gaussian densities over the exact law; rhs is the
    Hubbard-Stratonovich form z_N exp(-(N/s) phi(x / sqrt(N/s))).
    """
    if law is None:
        law = exact_law(params)
    a = dense(params.spec)
    if float(np.min(np.linalg.eigvalsh(a))) <= 0.0:
        raise ParameterError("Hubbard-Stratonovich transform needs a positive definite A")
    x = np.asarray(x, dtype=float)
    if x.shape != (params.n_blocks,):
        raise ParameterError(f"x must have {params.n_blocks} entries")
    gaussian = multivariate_normal(mean=np.zeros(params.n_blocks), cov=np.linalg.inv(a))
    shifted = x - math.sqrt(params.block_size) * law.support
    log_kernel = np.atleast_1d(gaussian.logpdf(shifted.reshape(len(law), params.n_blocks)))
    lhs = math.exp(float(logsumexp(law.log_probs + log_kernel)))
    rhs = math.exp(hs_normaliser(params, law, method) + _log_unnormalised_rhs(params, x))
    return HSDensity(lhs, rhs)


def dump_csv(law, path):
    """Write the law as CSV with columns m_1..m_s, log_prob"""
    header = [f"m_{k}" for k in range(1, law.n_blocks + 1)] + ["log_prob"]
    rows = (list(m) + [lp] for m, lp in zip(law.support, law.log_probs))
    return write_csv(path, header, rows)
