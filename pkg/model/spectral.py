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

Circulant interaction matrix and its closed-form spectral objects

The interaction matrix is A = beta*I + alpha*(P + P^T) with P the cyclic shift.
For two blocks P = P^T, which yields the [[beta, 2 alpha], [2 alpha, beta]]
convention, and for a single block P = I, which yields the Curie-Weiss
coupling [beta + 2 alpha].

"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from errors import ParameterError, RegimeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CirculantSpec:
    """Symmetric circulant with first row (diag, off, 0, ..., 0, off)"""

    size: int
    diag: float
    off: float

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 1:
            raise ParameterError(f"circulant size must be a positive integer, got {self.size}")

    @classmethod
    def from_params(cls, params):
        return cls(size=params.n_blocks, diag=float(params.beta), off=float(params.alpha))

    def scaled(self, factor):
        """Return the spec of factor * A"""
        return CirculantSpec(self.size, self.diag * factor, self.off * factor)

    def first_row(self):
        row = np.zeros(self.size)
        row[0] += self.diag
        row[1 % self.size] += self.off
        row[-1 % self.size] += self.off
        return row

    @property
    def is_positive_definite(self):
        return float(np.min(eigenvalues(self))) > 0.0


@dataclass(frozen=True)
class KappaConstants:
    """Geometric decay rates of the Green's-function covariances"""

    kappa1: Optional[float]
    kappa5: Optional[float]
    m_star: float


def apply(spec, x):
    """A @ x along the last axis using cyclic shifts of the first row"""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != spec.size:
        raise ParameterError(f"vector length {x.shape[-1]} does not match {spec.size} blocks")
    return spec.diag * x + spec.off * (np.roll(x, 1, axis=-1) + np.roll(x, -1, axis=-1))


def dense(spec):
    """Dense interaction matrix"""
    return scipy.linalg.circulant(spec.first_row())


def eigenvalues(spec):
    """lambda_j = diag + 2 off cos(2 pi j / s), j = 1..s"""
    j = np.arange(1, spec.size + 1)
    return spec.diag + 2.0 * spec.off * np.cos(2.0 * np.pi * j / spec.size)


def spectral_norm(spec):
    return float(np.max(np.abs(eigenvalues(spec))))


def hessian_at_zero_eigenvalues(spec):
    """
    Eigenvalues of A - A^2, the Hessian of the landscape at the origin

    Equal to lambda_j - lambda_j^2 for the eigenvalues lambda_j of A. Written
    out in cosines this carries the constant -2 alpha^2 from cos^2 = (1 + cos 2t)/2.
    """
    beta, alpha = spec.diag, spec.off
    t = 2.0 * np.pi * np.arange(1, spec.size + 1) / spec.size
    return (beta - beta ** 2 - 2.0 * alpha ** 2
            + (2.0 * alpha - 4.0 * alpha * beta) * np.cos(t)
            - 2.0 * alpha ** 2 * np.cos(2.0 * t))


def _green_discriminant(beta, alpha):
    """sqrt((1 - beta)^2 - 4 alpha^2), defined when beta + 2 alpha < 1"""
    if not beta + 2.0 * abs(alpha) < 1.0:
        raise RegimeError(f"closed form needs beta + 2 alpha < 1, got beta={beta}, alpha={alpha}")
    return math.sqrt((1.0 - beta) ** 2 - 4.0 * alpha ** 2)


def decay_rate(beta, alpha):
    """
    Minus-branch root of alpha k^2 - (1 - beta) k + alpha = 0

    Written as 2 alpha / ((1 - beta) + sqrt(D)), the same root as
    ((1 - beta) - sqrt(D)) / (2 alpha) without the cancellation, so alpha = 0 gives 0.
    """
    root = _green_discriminant(beta, alpha)
    return 2.0 * alpha / ((1.0 - beta) + root)


def _check_index(i, size=None):
    if int(i) != i or i < 1 or (size is not None and i > size):
        bound = f"1..{size}" if size is not None else ">= 1"
        raise ParameterError(f"block index {i} out of range {bound}")


def inverse_I_minus_A_entry(spec, i, j):
    """Entry (i, j) of (I - A)^-1 in closed form, 1-based indices"""
    _check_index(i, spec.size)
    _check_index(j, spec.size)
    root = _green_discriminant(spec.diag, spec.off)
    kappa = decay_rate(spec.diag, spec.off)
    s = spec.size
    d = abs(i - j)
    return (kappa ** d + kappa ** (s - d)) / ((1.0 - kappa ** s) * root)


def inverse_matrix(spec):
    """Closed-form (I - A)^-1 assembled from its first row"""
    row = np.array([inverse_I_minus_A_entry(spec, 1, j) for j in range(1, spec.size + 1)])
    return scipy.linalg.circulant(row)


def sigma_limit_entry(params, i, j):
    """Infinite-volume limit of (I - A)^-1 entries: kappa1^|i-j| / sqrt(D)"""
    _check_index(i)
    _check_index(j)
    root = _green_discriminant(params.beta, params.alpha)
    return decay_rate(params.beta, params.alpha) ** abs(i - j) / root


def _star_coefficients(params, m_star):
    if not 0.0 <= m_star <= 1.0:
        raise ParameterError(f"m_star must lie in [0, 1], got {m_star}")
    if not params.beta + 2.0 * params.alpha > 1.0:
        raise RegimeError(f"Sigma* needs beta + 2 alpha > 1, got {params.beta + 2.0 * params.alpha}")
    q = 1.0 - m_star ** 2
    beta_q, alpha_q = params.beta * q, params.alpha * q
    if not (1.0 - beta_q) ** 2 > 4.0 * alpha_q ** 2 or not beta_q + 2.0 * alpha_q < 1.0:
        raise RegimeError(
            f"Sigma* closed form undefined: (1 - beta q)^2 <= 4 (alpha q)^2 with q = {q}"
        )
    return q, beta_q, alpha_q


def sigma_star_entry(params, m_star, i, j):
    """Infinite-volume low-temperature covariance (1 - m*^2) kappa5^|i-j| / sqrt(D*)"""
    _check_index(i)
    _check_index(j)
    q, beta_q, alpha_q = _star_coefficients(params, m_star)
    root = _green_discriminant(beta_q, alpha_q)
    return q * decay_rate(beta_q, alpha_q) ** abs(i - j) / root


def sigma_star_finite_entry(params, m_star, i, j):
    """Finite-s low-temperature covariance (1 - m*^2) [(I - (1 - m*^2) A)^-1]_ij"""
    q, _, _ = _star_coefficients(params, m_star)
    spec = CirculantSpec.from_params(params).scaled(q)
    return q * inverse_I_minus_A_entry(spec, i, j)


def curie_weiss_variance(beta):
    """Limiting variance 1 / (1 - beta) of sqrt(N) m in the Curie-Weiss model"""
    if not beta < 1.0:
        raise RegimeError(f"Curie-Weiss variance needs beta < 1, got {beta}")
    return 1.0 / (1.0 - beta)


def kappa_constants(params):
    """kappa1 (high temperature), kappa5 and m* for the given parameters"""
    from model.landscape import solve_m_star

    theta = params.beta + 2.0 * params.alpha
    m_star = solve_m_star(theta)
    kappa1 = decay_rate(params.beta, params.alpha) if theta < 1.0 else None
    kappa5 = None
    if theta > 1.0:
        q = 1.0 - m_star ** 2
        kappa5 = decay_rate(params.beta * q, params.alpha * q)
    elif theta < 1.0:
        kappa5 = kappa1
    return KappaConstants(kappa1=kappa1, kappa5=kappa5, m_star=m_star)


def discrete_poisson_lhs(r, s, m):
    """(1/s) sum_l exp(2 pi i l m / s) / (1 - 2 r cos(2 pi l / s) + r^2), complex"""
    l = np.arange(s)
    phase = np.exp(2j * np.pi * l * m / s)
    return complex(np.sum(phase / (1.0 - 2.0 * r * np.cos(2.0 * np.pi * l / s) + r * r)) / s)


def discrete_poisson_check(r, s, m):
    """Both sides of the discrete Poisson identity"""
    if not 0.0 < r < 1.0:
        raise ParameterError(f"r must lie in (0, 1), got {r}")
    if not 0 <= m < s:
        raise ParameterError(f"m must lie in [0, {s}), got {m}")
    lhs = discrete_poisson_lhs(r, s, m).real
    rhs = (r ** m + r ** (s - m)) / ((1.0 - r * r) * (1.0 - r ** s))
    return lhs, rhs


def geometric_series_check(r, s, l, truncation=200):
    """Truncated sum_k r^|k| exp(2 pi i k l / s) against (1 - r^2)/(1 - 2 r cos(2 pi l / s) + r^2)"""
    k = np.arange(-truncation, truncation + 1)
    series = np.sum(r ** np.abs(k) * np.exp(2j * np.pi * k * l / s))
    closed = (1.0 - r * r) / (1.0 - 2.0 * r * np.cos(2.0 * np.pi * l / s) + r * r)
    return complex(series), float(closed)
