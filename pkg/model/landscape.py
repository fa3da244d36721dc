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

Hubbard-Stratonovich free-energy landscape

phi(x) = (1/2) x^T A x - sum_k log cosh((A x)_k). Up to normalisation,
exp(-(N/s_N) phi(sqrt(s_N/N) x)) is the density of sqrt(N/s_N) m + Z with
Z ~ N(0, A^-1) independent of the magnetization.

"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, NamedTuple

import numpy as np
from scipy.optimize import bisect
from scipy.special import entr

from errors import ParameterError
from model.spectral import apply, dense

logger = logging.getLogger(__name__)

CRITICAL_TOLERANCE = 1e-12
FIXED_POINT_TOLERANCE = 1e-12
FIXED_POINT_MAX_ITER = 100_000
VERIFY_TOLERANCE = 1e-10

REGIME_HIGH = "high"
REGIME_CRITICAL = "critical"
REGIME_LOW = "low"


class FixedPointResult(NamedTuple):
    x: np.ndarray
    converged: bool
    iterations: int


@dataclass
class LandscapeResult:
    minimizers: List[np.ndarray]
    regime: str
    m_star: float
    phi_at_min: float
    gap: float
    grad_residual: float = 0.0
    hessian_min_eigenvalue: float = 0.0
    verified: bool = True
    notes: List[str] = field(default_factory=list)

    def to_dict(self):
        return {
            "regime": self.regime,
            "gap": self.gap,
            "m_star": self.m_star,
            "phi_at_min": self.phi_at_min,
            "minimizers": [np.asarray(x).tolist() for x in self.minimizers],
            "grad_residual": self.grad_residual,
            "hessian_min_eigenvalue": self.hessian_min_eigenvalue,
            "verified": self.verified,
        }


def _check_dimension(spec, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.size,):
        raise ParameterError(f"x must have length {spec.size}, got shape {x.shape}")
    return x


def log_cosh(y):
    """log cosh(y) = |y| + log(1 + exp(-2|y|)) - log 2, finite for large |y|"""
    a = np.abs(y)
    return a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0)


def phi(spec, x):
    x = _check_dimension(spec, x)
    ax = apply(spec, x)
    return float(0.5 * np.dot(x, ax) - np.sum(log_cosh(ax)))


def grad_phi(spec, x):
    """A (x - tanh(A x))"""
    x = _check_dimension(spec, x)
    return apply(spec, x - np.tanh(apply(spec, x)))


def hess_phi(spec, x):
    """A - A diag(sech^2((A x)_k)) A"""
    x = _check_dimension(spec, x)
    a = dense(spec)
    sech2 = 1.0 / np.cosh(apply(spec, x)) ** 2
    return a - (a * sech2) @ a


def h_map(spec, x):
    """The fixed-point map x -> tanh(A x); critical points of phi are its fixed points"""
    return np.tanh(apply(spec, x))


def fixed_point_iterate(spec, x0, max_iter=FIXED_POINT_MAX_ITER, tol=FIXED_POINT_TOLERANCE):
    """Iterate x <- tanh(A x) until the sup-norm step drops below tol"""
    x = _check_dimension(spec, x0).copy()
    if np.any(np.abs(x) > 1.0):
        raise ParameterError("fixed-point start must lie in [-1, 1]^s")
    for iteration in range(1, max_iter + 1):
        x_next = h_map(spec, x)
        step = float(np.max(np.abs(x_next - x)))
        x = x_next
        if step < tol:
            logger.debug(f"fixed point reached after {iteration} iterations")
            return FixedPointResult(x, True, iteration)
    logger.warning(f"fixed-point iteration did not converge in {max_iter} iterations (last step {step:.3e})")
    return FixedPointResult(x, False, max_iter)


def solve_m_star(theta):
    """Largest root of x = tanh(theta x) in [0, 1)"""
    if not theta > 0.0:
        raise ParameterError(f"theta must be positive, got {theta}")
    if theta <= 1.0:
        return 0.0
    # tanh(y) >= y - y^3/3 puts the positive root above sqrt(3 (theta - 1) / theta^3)
    lower = 0.5 * math.sqrt(3.0 * (theta - 1.0) / theta ** 3)
    return bisect(lambda x: math.tanh(theta * x) - x, lower, 1.0, xtol=1e-15, rtol=4.0 * np.finfo(float).eps, maxiter=200)


def entropy(m):
    """s(m) = -((1+m)/2) log((1+m)/2) - ((1-m)/2) log((1-m)/2), with s(+-1) = 0"""
    m = np.asarray(m, dtype=float)
    if np.any(np.abs(m) > 1.0):
        raise ParameterError("entropy is defined on [-1, 1]")
    return entr((1.0 + m) / 2.0) + entr((1.0 - m) / 2.0)


def rate_function_F(theta, m):
    """F_theta(m) = (theta/2) m^2 - log 2 + s(m)"""
    if not theta > 0.0:
        raise ParameterError(f"theta must be positive, got {theta}")
    value = 0.5 * theta * np.asarray(m, dtype=float) ** 2 - math.log(2.0) + entropy(m)
    return float(value) if np.ndim(value) == 0 else value


def log_cosh_deviation(y):
    """G(y) = log cosh(y) - y^2 / 2"""
    y = np.asarray(y, dtype=float)
    value = log_cosh(y) - 0.5 * y * y
    return float(value) if np.ndim(value) == 0 else value


def regime_of(theta):
    gap = theta - 1.0
    if abs(gap) <= CRITICAL_TOLERANCE:
        return REGIME_CRITICAL
    return REGIME_HIGH if gap < 0.0 else REGIME_LOW


def minimizer_vector(params, sign=1):
    """+-m* (1, ..., 1)"""
    return sign * solve_m_star(params.theta) * np.ones(params.n_blocks)


def classify_minimizers(params):
    """Global minimizers of phi by temperature regime, checked by gradient and Hessian"""
    if not params.beta > 2.0 * params.alpha > 0.0:
        raise ParameterError(
            f"minimizers are only characterised for beta > 2 alpha > 0, got beta={params.beta}, alpha={params.alpha}"
        )
    spec = params.spec
    theta = params.theta
    regime = regime_of(theta)
    m_star = solve_m_star(theta) if regime == REGIME_LOW else 0.0
    if regime == REGIME_LOW:
        plus = m_star * np.ones(params.n_blocks)
        minimizers = [plus, -plus]
    else:
        minimizers = [np.zeros(params.n_blocks)]

    result = LandscapeResult(
        minimizers=minimizers,
        regime=regime,
        m_star=m_star,
        phi_at_min=phi(spec, minimizers[0]),
        gap=theta - 1.0,
    )
    result.grad_residual = max(float(np.max(np.abs(grad_phi(spec, x)))) for x in minimizers)
    result.hessian_min_eigenvalue = min(float(np.min(np.linalg.eigvalsh(hess_phi(spec, x)))) for x in minimizers)
    result.verified = result.grad_residual < VERIFY_TOLERANCE and result.hessian_min_eigenvalue > -VERIFY_TOLERANCE

    if regime == REGIME_LOW:
        iterate = fixed_point_iterate(spec, np.ones(params.n_blocks))
        agreement = float(np.max(np.abs(iterate.x - minimizers[0])))
        if not iterate.converged or agreement > 1e-9:
            result.verified = False
            result.notes.append(f"fixed-point iteration disagrees with bisection by {agreement:.3e}")
    if regime == REGIME_CRITICAL:
        result.notes.append(f"critical line: beta + 2 alpha - 1 = {result.gap:.3e}")

    if not result.verified:
        logger.warning(f"minimizer verification failed for {params}: {result.notes}")
    logger.debug(f"regime={regime} m_star={m_star} phi_at_min={result.phi_at_min}")
    return result
