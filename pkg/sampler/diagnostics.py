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

MCMC diagnostics: integrated autocorrelation time, effective sample size, R-hat

"""

import logging
from typing import NamedTuple

import numpy as np

from errors import DiagnosticsError

logger = logging.getLogger(__name__)

MIN_SAMPLES = 100


class Diagnostics(NamedTuple):
    tau: np.ndarray
    ess: np.ndarray
    rhat: np.ndarray
    degenerate: np.ndarray

    def to_dict(self):
        return {
            "tau": self.tau.tolist(),
            "ess": self.ess.tolist(),
            "rhat": self.rhat.tolist(),
            "degenerate": self.degenerate.tolist(),
        }


def autocorrelation(x):
    """Normalised autocorrelation at all lags via a zero-padded FFT"""
    x = np.asarray(x, dtype=float)
    n = x.size
    centred = x - x.mean()
    size = 2 ** int(np.ceil(np.log2(2 * n)))
    spectrum = np.fft.rfft(centred, n=size)
    acov = np.fft.irfft(spectrum * np.conjugate(spectrum), n=size)[:n] / n
    if acov[0] <= 0.0:
        return np.zeros(n)
    return acov / acov[0]


def integrated_autocorrelation_time(x):
    """
    Initial positive sequence estimator

    tau = -1 + 2 sum_k (rho_2k + rho_2k+1), summed while the pair sums stay
    positive. A constant series has no information beyond one draw: tau = n.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if np.ptp(x) == 0.0:
        return float(n)
    rho = autocorrelation(x)
    n_pairs = n // 2
    pairs = rho[: 2 * n_pairs : 2] + rho[1 : 2 * n_pairs : 2]
    negative = np.nonzero(pairs <= 0.0)[0]
    stop = negative[0] if negative.size else n_pairs
    tau = -1.0 + 2.0 * float(np.sum(pairs[:stop]))
    return min(max(tau, 1.0 / n), float(n))


def effective_sample_size(x):
    x = np.asarray(x, dtype=float)
    return x.size / integrated_autocorrelation_time(x)


def _gelman_rubin(chains):
    chains = np.asarray(chains, dtype=float)
    n = chains.shape[1]
    within = float(np.mean(np.var(chains, axis=1, ddof=1)))
    between = n * float(np.var(np.mean(chains, axis=1), ddof=1))
    if within == 0.0:
        return 1.0 if between == 0.0 else float("inf")
    pooled = (n - 1) / n * within + between / n
    return float(np.sqrt(pooled / within))


def split_rhat(x):
    """R-hat between the two halves of one chain"""
    x = np.asarray(x, dtype=float)
    half = x.size // 2
    return _gelman_rubin([x[:half], x[half : 2 * half]])


def multi_chain_rhat(chains):
    """Split R-hat over several independent chains, truncated to a common length"""
    length = min(len(c) for c in chains)
    half = length // 2
    pieces = []
    for chain in chains:
        chain = np.asarray(chain, dtype=float)[:length]
        pieces.extend([chain[:half], chain[half : 2 * half]])
    return _gelman_rubin(pieces)


def diagnostics(samples):
    """Per-coordinate tau, ESS and split R-hat of an (n,) or (n, d) sample array"""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    n = samples.shape[0]
    if n < MIN_SAMPLES:
        raise DiagnosticsError(f"diagnostics need at least {MIN_SAMPLES} samples, got {n}")
    tau = np.array([integrated_autocorrelation_time(column) for column in samples.T])
    rhat = np.array([split_rhat(column) for column in samples.T])
    degenerate = np.ptp(samples, axis=0) == 0.0
    if np.any(degenerate):
        logger.warning(f"{int(degenerate.sum())} coordinate(s) never moved; ESS set to 1")
    return Diagnostics(tau=tau, ess=n / tau, rhat=rhat, degenerate=degenerate)
