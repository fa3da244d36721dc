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

Acceptance suites run by `blockspin verify`

closed-forms and oracle are deterministic checks of the analytic layer
against dense linear algebra and enumeration; chain cross-checks the transfer
matrix; lln and clt run the statistical experiments at acceptance sizes with
the sampler settings of the run configuration.

"""

import logging
import math
import time
from dataclasses import replace

import numpy as np
from scipy.stats import linregress

from errors import ConfigError
from harness.experiments import (
    DEFAULT_CEILING,
    DEFAULT_SIGN_CEILING,
    clt_exact_check,
    clt_high_temperature,
    clt_low_temperature,
    lln_high_temperature,
    lln_low_temperature,
)
from harness.report import ExperimentReport
from model.core import ModelParams, counts_from_magnetization
from model.landscape import classify_minimizers, fixed_point_iterate, hess_phi, solve_m_star
from model.spectral import (
    CirculantSpec,
    dense,
    discrete_poisson_check,
    eigenvalues,
    geometric_series_check,
    hessian_at_zero_eigenvalues,
    inverse_matrix,
    kappa_constants,
    sigma_star_finite_entry,
)
from oracle.exact import exact_law, hs_density_check, marginal, spin_level_law, total_variation
from oracle.transfer import ChainSpec, chain_marginal, log_partition, total_magnetization_stats, two_point_function
from sampler.chain import sample_chain, transition_probabilities

logger = logging.getLogger(__name__)

EIGENVALUE_TOLERANCE = 1e-10
INVERSE_TOLERANCE = 1e-9
POISSON_TOLERANCE = 1e-12
TV_TOLERANCE = 1e-12
PARTITION_TOLERANCE = 1e-10
BALANCE_TOLERANCE = 1e-12
EMPIRICAL_TV_CEILING = 0.02
EMPIRICAL_SWEEPS = 10 ** 6
HS_TOLERANCE = 1e-6
GEOMETRIC_R2 = 0.999

HIGH = (0.5, 0.2)
LOW = (0.8, 0.25)
CLT_HIGH = (0.4, 0.1)


def _close(report, name, value, target, tolerance, relative=False):
    value, target = np.asarray(value, dtype=float), np.asarray(target, dtype=float)
    error = float(np.max(np.abs(value - target)))
    if relative:
        error /= float(np.max(np.abs(target)))
    kind = "relative" if relative else "max abs"
    report.add_estimate(name, error, 0.0)
    report.check(name, error <= tolerance, f"{kind} error <= {tolerance:g}", f"error {error:.3e}")


def _finish(report, started):
    report.runtime_s = time.perf_counter() - started
    logger.info(f"{report.experiment}: {len(report.verdicts)} checks, {report.status} in {report.runtime_s:.2f}s")
    return report


def closed_forms_suite(config=None, threads=1):
    started = time.perf_counter()
    report = ExperimentReport(experiment="closed_forms", params={})
    for beta, alpha in (HIGH, CLT_HIGH, (0.3, 0.05)):
        for s in (1, 2, 3, 8, 17, 64, 512):
            spec = CirculantSpec(s, beta, alpha)
            key = f"b{beta:g}_a{alpha:g}_s{s}"
            a = dense(spec)
            _close(report, f"eigenvalues_{key}", np.sort(eigenvalues(spec)), np.linalg.eigvalsh(a), EIGENVALUE_TOLERANCE)
            _close(report, f"inverse_{key}", inverse_matrix(spec), np.linalg.inv(np.eye(s) - a), INVERSE_TOLERANCE)
            _close(report, f"hessian_zero_{key}", np.sort(hessian_at_zero_eigenvalues(spec)),
                   np.linalg.eigvalsh(hess_phi(spec, np.zeros(s))), EIGENVALUE_TOLERANCE)

    residual = 0.0
    for r in (0.1, 0.3, 0.5, 0.7, 0.9):
        for s in (4, 16):
            for m in range(s):
                lhs, rhs = discrete_poisson_check(r, s, m)
                residual = max(residual, abs(lhs - rhs))
            series, closed = geometric_series_check(r, s, 1, truncation=int(math.ceil(40 / -math.log(r))))
            _close(report, f"geometric_r{r:g}_s{s}", series.real, closed, EIGENVALUE_TOLERANCE)
    report.add_estimate("poisson_residual", residual, 0.0)
    report.check("poisson_residual", residual <= POISSON_TOLERANCE, f"max residual <= {POISSON_TOLERANCE:g}",
                 f"residual {residual:.3e} over 100 (r, s, m) points")

    for theta in (1.05, 1.3, 2.0):
        m_star = solve_m_star(theta)
        _close(report, f"m_star_fixed_point_t{theta:g}", math.tanh(theta * m_star), m_star, 1e-14)
        iterate = fixed_point_iterate(CirculantSpec(6, theta - 0.5, 0.25), np.ones(6))
        _close(report, f"fixed_point_iteration_t{theta:g}", iterate.x, m_star * np.ones(6), 1e-9)

    rng = np.random.default_rng(0 if config is None else config.seed)
    spec = CirculantSpec(8, *HIGH)
    worst = max(float(np.max(np.abs(fixed_point_iterate(spec, rng.uniform(-1.0, 1.0, 8)).x))) for _ in range(50))
    _close(report, "fixed_point_high_temperature", worst, 0.0, 1e-10)

    beta, alpha = LOW
    params = ModelParams(beta=beta, alpha=alpha, n_spins=600, n_blocks=6)
    m_star = solve_m_star(params.theta)
    q = 1.0 - m_star ** 2
    numeric = q * np.linalg.inv(np.eye(6) - q * dense(params.spec))
    finite = np.array([[sigma_star_finite_entry(params, m_star, i, j) for j in range(1, 7)] for i in range(1, 7)])
    _close(report, "sigma_star_finite", finite, numeric, INVERSE_TOLERANCE)
    report.add_reference("m_star", m_star)
    report.add_reference("kappa5", kappa_constants(params).kappa5)

    for beta, alpha in (HIGH, LOW):
        result = classify_minimizers(ModelParams(beta=beta, alpha=alpha, n_spins=600, n_blocks=6))
        report.check(f"minimizers_b{beta:g}_a{alpha:g}", result.verified, "gradient and Hessian verified",
                     f"regime {result.regime}, residual {result.grad_residual:.3e}")
    return [_finish(report, started)]


def _detailed_balance_residual(params, law):
    """max |pi(n) P(n, n + e_k) - pi(n + e_k) P(n + e_k, n)| over the lattice"""
    base = params.block_size + 1
    probs = law.probs
    residual = 0.0
    for index, counts in enumerate(law.counts.astype(np.int64)):
        for k in range(1, params.n_blocks + 1):
            if counts[k - 1] == params.block_size:
                continue
            up = counts.copy()
            up[k - 1] += 1
            target = int(np.ravel_multi_index(tuple(up), (base,) * params.n_blocks))
            forward = probs[index] * transition_probabilities(params, counts, k).up
            backward = probs[target] * transition_probabilities(params, up, k).down
            residual = max(residual, abs(forward - backward) / params.n_blocks)
    return residual


def _empirical_tv(params, law, config):
    base = params.block_size + 1
    chain_config = replace(config, burn_in_sweeps=100, thinning_sweeps=1, n_samples=EMPIRICAL_SWEEPS,
                           init="all_plus", init_vector=None)
    values = sample_chain(params, chain_config).values
    counts = counts_from_magnetization(values, params.block_size)
    index = np.ravel_multi_index(tuple(counts.T), (base,) * params.n_blocks)
    empirical = np.bincount(index, minlength=len(law)) / values.shape[0]
    return 0.5 * float(np.sum(np.abs(empirical - law.probs)))


def oracle_suite(config=None, threads=1):
    started = time.perf_counter()
    report = ExperimentReport(experiment="oracle", params={})
    for beta, alpha in (HIGH, LOW):
        for n, s in ((8, 2), (12, 3), (12, 4), (16, 4)):
            params = ModelParams(beta=beta, alpha=alpha, n_spins=n, n_blocks=s)
            key = f"b{beta:g}_a{alpha:g}_N{n}_s{s}"
            lattice = exact_law(params, threads=threads)
            spins = spin_level_law(params)
            tv = total_variation(lattice, spins)
            report.add_estimate(f"tv_{key}", tv, 0.0)
            report.check(f"tv_{key}", tv <= TV_TOLERANCE, f"total variation <= {TV_TOLERANCE:g}", f"tv {tv:.3e}")
            _close(report, f"flip_symmetry_{key}", lattice.log_probs, lattice.log_probs[::-1], TV_TOLERANCE)

        params = ModelParams(beta=beta, alpha=alpha, n_spins=8, n_blocks=2)
        residual = _detailed_balance_residual(params, exact_law(params))
        key = f"b{beta:g}_a{alpha:g}"
        report.add_estimate(f"detailed_balance_{key}", residual, 0.0)
        report.check(f"detailed_balance_{key}", residual <= BALANCE_TOLERANCE,
                     f"entrywise residual <= {BALANCE_TOLERANCE:g}", f"residual {residual:.3e}")

    if config is not None:
        params = ModelParams(beta=HIGH[0], alpha=HIGH[1], n_spins=12, n_blocks=3)
        tv = _empirical_tv(params, exact_law(params), config)
        report.add_estimate("empirical_tv", tv, 0.0)
        report.check("empirical_tv", tv < EMPIRICAL_TV_CEILING,
                     f"TV after {EMPIRICAL_SWEEPS} sweeps < {EMPIRICAL_TV_CEILING}", f"tv {tv:.4f}")

    for params, x in ((ModelParams(beta=0.5, alpha=0.2, n_spins=12, n_blocks=1, strict=False), [0.3]),
                      (ModelParams(beta=0.5, alpha=0.2, n_spins=12, n_blocks=2), [0.3, -0.2]),
                      (ModelParams(beta=0.8, alpha=0.25, n_spins=12, n_blocks=3), [0.5, 0.4, -0.1])):
        density = hs_density_check(params, np.array(x))
        key = f"s{params.n_blocks}"
        relative = abs(density.lhs - density.rhs) / density.lhs
        report.add_estimate(f"hs_density_{key}", relative, 0.0)
        report.check(f"hs_density_{key}", relative <= HS_TOLERANCE, f"relative error <= {HS_TOLERANCE:g}",
                     f"lhs {density.lhs:.6g}, rhs {density.rhs:.6g}")

    reports = [_finish(report, started)]
    beta, alpha = CLT_HIGH
    reports.append(clt_exact_check(ModelParams(beta=beta, alpha=alpha, n_spins=12, n_blocks=2), (12, 24, 48)))
    return reports


def chain_suite(config=None, threads=1):
    started = time.perf_counter()
    report = ExperimentReport(experiment="chain", params={})
    for beta, alpha in (HIGH, LOW):
        for n, s in ((12, 3), (16, 4), (20, 5), (24, 6)):
            params = ModelParams(beta=beta, alpha=alpha, n_spins=n, n_blocks=s)
            key = f"b{beta:g}_a{alpha:g}_N{n}_s{s}"
            chain = ChainSpec.from_params(params)
            law = exact_law(params, threads=threads)
            _close(report, f"log_Z_{key}", log_partition(chain), law.log_Z, PARTITION_TOLERANCE, relative=True)
            _close(report, f"marginal_{key}", chain_marginal(chain, 1), marginal(law, 1), PARTITION_TOLERANCE)

    for alpha in (0.2, 0.5, 1.0):
        chain = ChainSpec(block_size=1, beta=0.0, alpha=alpha, n_blocks=400)
        for r in (1, 2, 5):
            _close(report, f"ising_1d_a{alpha:g}_r{r}", two_point_function(chain, r, infinite=True),
                   math.tanh(alpha) ** r, 1e-10)

    beta, alpha = HIGH
    variances = []
    for s in (8, 16, 32, 64, 128, 256):
        stats = total_magnetization_stats(ChainSpec(block_size=10, beta=beta, alpha=alpha, n_blocks=s))
        _close(report, f"mean_total_s{s}", stats.mean, 0.0, 1e-14)
        variances.append(stats.variance_per_block)
        report.add_estimate(f"variance_per_block_s{s}", stats.variance_per_block, 0.0)
    report.check("variance_bounded", max(variances) <= 1.05 * variances[0] and
                 abs(variances[-1] - variances[-2]) <= 1e-10 * variances[-1],
                 "no growth as s doubles from 8 to 256", f"variances {variances}")

    chain = ChainSpec(block_size=10, beta=beta, alpha=alpha, n_blocks=256)
    distances = np.arange(1, 9)
    correlations = np.array([two_point_function(chain, int(r), infinite=True) for r in distances])
    fit = linregress(distances, np.log(correlations))
    report.add_estimate("geometric_fit_r2", fit.rvalue ** 2, 0.0)
    report.add_estimate("geometric_fit_rate", math.exp(fit.slope), float(fit.stderr))
    report.check("geometric_fit_r2", fit.rvalue ** 2 > GEOMETRIC_R2, f"R^2 > {GEOMETRIC_R2}",
                 f"R^2 {fit.rvalue ** 2:.6f}")
    _close(report, "infinite_volume_limit", two_point_function(chain, 3),
           two_point_function(chain, 3, infinite=True), 1e-8)
    return [_finish(report, started)]


REFERENCE_LADDER = (800, 1600, 3200)


def _setting(experiment, key, fallback):
    """Experiment setting from the run configuration; None keeps the suite's own value"""
    value = (experiment or {}).get(key)
    return fallback if value is None else value


def lln_suite(config, threads=1, experiment=None, n_replicas=4):
    reports = []
    beta, alpha = HIGH
    n_ladder = tuple(_setting(experiment, "n_ladder", (3200, 6400, 12800)))
    params = ModelParams(beta=beta, alpha=alpha, n_spins=n_ladder[0], n_blocks=8)
    reports.append(lln_high_temperature(params, _setting(experiment, "eps", 0.2), n_replicas, config,
                                        n_ladder=n_ladder, s_ladder=_setting(experiment, "s_ladder", None),
                                        ceiling=_setting(experiment, "ceiling", DEFAULT_CEILING),
                                        reference_ladder=REFERENCE_LADDER, threads=threads))
    beta, alpha = LOW
    n_ladder = tuple(_setting(experiment, "n_ladder", (600, 1200, 2400)))
    params = ModelParams(beta=beta, alpha=alpha, n_spins=n_ladder[0], n_blocks=6)
    reports.append(lln_low_temperature(params, _setting(experiment, "eps", 0.15), n_replicas, config,
                                       n_ladder=n_ladder, s_ladder=_setting(experiment, "s_ladder", None),
                                       ceiling=_setting(experiment, "ceiling", DEFAULT_CEILING),
                                       sign_ceiling=_setting(experiment, "sign_ceiling", DEFAULT_SIGN_CEILING),
                                       balance_replicas=_setting(experiment, "balance_replicas", 100),
                                       threads=threads))
    return reports


def clt_suite(config, threads=1, experiment=None, n_replicas=4):
    reports = []
    d = int(_setting(experiment, "d", 3))
    n_samples = 5000
    beta, alpha = CLT_HIGH
    params = ModelParams(beta=beta, alpha=alpha, n_spins=40000, n_blocks=8)
    reports.append(clt_high_temperature(params, d, n_samples, config, n_replicas=n_replicas, threads=threads))
    relaxed = ModelParams(beta=beta, alpha=0.0, n_spins=40000, n_blocks=8, strict=False)
    independent = clt_high_temperature(relaxed, d, n_samples, config, n_replicas=n_replicas, threads=threads)
    independent.experiment = "clt_independent_blocks"
    reports.append(independent)
    beta, alpha = LOW
    params = ModelParams(beta=beta, alpha=alpha, n_spins=6000, n_blocks=6)
    delta = _setting(experiment, "delta", 0.5 * solve_m_star(params.theta))
    reports.append(clt_low_temperature(params, min(d, params.n_blocks), delta, n_samples, config,
                                       n_replicas=n_replicas, threads=threads))
    return reports


SUITES = {
    "closed-forms": closed_forms_suite,
    "oracle": oracle_suite,
    "chain": chain_suite,
    "lln": lln_suite,
    "clt": clt_suite,
}
SAMPLING_SUITES = ("lln", "clt")


def run_suite(name, config, threads=1, experiment=None, n_replicas=4):
    """
    Reports of the named suite; "all" runs every suite in order

    `experiment` holds the experiment section of the run configuration; the
    sampling suites take their eps, ladders, ceilings, d and delta from it.
    """
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise ConfigError(f"unknown suite {name!r}; choose from {sorted(SUITES) + ['all']}")
    reports = []
    for suite in names:
        logger.info(f"Running suite {suite}")
        if suite in SAMPLING_SUITES:
            reports.extend(SUITES[suite](config, threads=threads, experiment=experiment, n_replicas=n_replicas))
        else:
            reports.extend(SUITES[suite](config, threads=threads))
    return reports
