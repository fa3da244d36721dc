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

blockspin

Command-line entry point for the block-spin mean-field Ising toolkit:
analytic summaries, seeded simulation, exact enumeration, acceptance suites
and phase sweeps.

"""

import argparse
import logging
import sys
from dataclasses import asdict

import numpy as np

from collector.report import set_report_metrics, write_metrics_file
from errors import BlockspinError
from harness.experiments import SWEEP_HEADER, phase_sweep
from harness.report import STATUS_FAIL, STATUS_INCONCLUSIVE
from harness.suites import SUITES, run_suite
from model.landscape import REGIME_LOW, classify_minimizers, regime_of, solve_m_star
from model.spectral import (
    eigenvalues,
    hessian_at_zero_eigenvalues,
    inverse_I_minus_A_entry,
    kappa_constants,
    sigma_limit_entry,
    sigma_star_entry,
    sigma_star_finite_entry,
)
from oracle.exact import dump_csv, exact_law, exact_moments, n_lattice_states
from oracle.transfer import ChainSpec, log_partition, total_magnetization_stats
from sampler.chain import INIT_MODES, dump_samples, run_replicas
from sampler.diagnostics import MIN_SAMPLES, diagnostics, multi_chain_rhat
from utils.common import VERSION
from utils.config import resolve_config
from utils.io import write_csv, write_json
from utils.plot import phase_heatmap, trajectory_heatmap

# Set up basic logging configuration
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    datefmt='%Y-%m-%d %H:%M:%S'
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_INCONCLUSIVE = 4

DEFAULT_BETA_GRID = [0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
DEFAULT_ALPHA_GRID = [0.05, 0.1, 0.15, 0.2, 0.25]
LEADING_ENTRIES = ((1, 1), (1, 2), (1, 3))


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text):
    return [int(v) for v in text.split(",") if v.strip()]


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, help='TOML or JSON config file; flags override its values')
    common.add_argument('--beta', type=float, help='Intra-block coupling')
    common.add_argument('--alpha', type=float, help='Neighbouring-block coupling')
    common.add_argument('--n-spins', type=int, help='Number of spins N')
    common.add_argument('--n-blocks', type=int, help='Number of blocks s_N (must divide N)')
    common.add_argument('--relaxed', action='store_const', const=False, dest='strict',
                        help='Admit alpha = 0 and couplings outside beta > 2 alpha > 0')
    common.add_argument('--seed', type=int, help='Master seed')
    common.add_argument('--out', type=str, help='Output directory')
    common.add_argument('--threads', type=int, help='Worker processes (default: $BLOCKSPIN_THREADS or 1)')
    common.add_argument('--format', type=str, choices=['csv', 'json', 'bin'], help='Data file format')
    common.add_argument('--log-level', type=str, default='INFO', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
                        help='Set the logging level (default: INFO)')

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument('--burn-in', type=int, dest='burn_in_sweeps', help='Burn-in sweeps')
    sampling.add_argument('--thinning', type=int, dest='thinning_sweeps', help='Sweeps between samples')
    sampling.add_argument('--n-samples', type=int, help='Samples per replica')
    sampling.add_argument('--replicas', type=int, dest='n_replicas', help='Independent replicas')
    sampling.add_argument('--metrics-file', type=str, help='Write Prometheus text metrics to this file')

    parser = argparse.ArgumentParser(
        prog='blockspin', description='Block-spin mean-field Ising toolkit',
        epilog='exit codes: 0 pass, 1 a criterion failed, 2 invalid parameters or configuration, '
               '3 output could not be written, 4 inconclusive (no failure, but too few effective samples)')
    parser.add_argument('--version', action='version', version=f'%(prog)s {VERSION}')
    commands = parser.add_subparsers(dest='command', required=True)

    commands.add_parser('analyze', parents=[common], help='Analytic summary of the parameters')

    simulate = commands.add_parser('simulate', parents=[common, sampling], help='Run heat-bath chains')
    simulate.add_argument('--init', type=str, choices=INIT_MODES, help='Initial state')
    simulate.add_argument('--init-vector', type=_floats, help='Comma-separated block magnetizations for from_vector')

    exact = commands.add_parser('exact', parents=[common], help='Exact law by enumeration')
    exact.add_argument('--budget', type=int, help='Maximum number of lattice states')
    exact.add_argument('--d', type=int, help='Leading blocks in the moment summary')

    verify = commands.add_parser('verify', parents=[common, sampling], help='Run an acceptance suite')
    verify.add_argument('suite', type=str, choices=sorted(SUITES) + ['all'], help='Suite name')
    verify.add_argument('--eps', type=float, help='Tail threshold of the law-of-large-numbers suites')
    verify.add_argument('--n-ladder', type=_ints, help='Comma-separated N values of the law-of-large-numbers ladders')
    verify.add_argument('--s-ladder', type=_ints, help='Comma-separated s_N values per rung (experimental s_N growth)')
    verify.add_argument('--ceiling', type=float, help='Ceiling for the tail at the top of a ladder')
    verify.add_argument('--sign-ceiling', type=float, help='Ceiling for sign disagreement at low temperature')
    verify.add_argument('--balance-replicas', type=int, help='Random-start chains for the phase balance check')
    verify.add_argument('--d', type=int, help='Leading blocks in the central limit suites')
    verify.add_argument('--delta', type=float, help='Ball radius of the low-temperature central limit suite')

    sweep = commands.add_parser('sweep', parents=[common, sampling], help='Phase sweep over a (beta, alpha) grid')
    sweep.add_argument('--beta-grid', type=_floats, help='Comma-separated beta values')
    sweep.add_argument('--alpha-grid', type=_floats, help='Comma-separated alpha values')
    sweep.add_argument('--threshold', type=float, help='E|m_bar| above which a point counts as ordered')
    return parser


def _overrides(args):
    """Flag values shaped like the config file"""
    get = lambda name: getattr(args, name, None)  # noqa: E731
    return {
        "model": {"beta": get("beta"), "alpha": get("alpha"), "n_spins": get("n_spins"),
                  "n_blocks": get("n_blocks"), "strict": get("strict")},
        "sampler": {"seed": get("seed"), "burn_in_sweeps": get("burn_in_sweeps"),
                    "thinning_sweeps": get("thinning_sweeps"), "n_samples": get("n_samples"),
                    "init": get("init"), "init_vector": get("init_vector"), "n_replicas": get("n_replicas")},
        "experiment": {"eps": get("eps"), "delta": get("delta"), "d": get("d"), "n_ladder": get("n_ladder"),
                       "s_ladder": get("s_ladder"), "ceiling": get("ceiling"), "sign_ceiling": get("sign_ceiling"),
                       "balance_replicas": get("balance_replicas"), "beta_grid": get("beta_grid"),
                       "alpha_grid": get("alpha_grid"), "threshold": get("threshold")},
        "run": {"out": get("out"), "threads": get("threads"), "format": get("format"), "budget": get("budget")},
    }


def _echo_config(run_config):
    write_json(run_config.out / "config.json", run_config.to_dict())


def cmd_analyze(run_config):
    """Regime, m*, spectra, decay rates and leading covariance entries"""
    params = run_config.model_params()
    spec = params.spec
    theta = params.theta
    regime = regime_of(theta)
    lambdas = eigenvalues(spec)
    kappas = kappa_constants(params)
    summary = {
        "params": params.to_dict(),
        "theta": theta,
        "regime": regime,
        "gap": theta - 1.0,
        "m_star": solve_m_star(theta),
        "positive_definite": spec.is_positive_definite,
        "eigenvalue_range": [float(lambdas.min()), float(lambdas.max())],
        "hessian_at_zero": np.sort(hessian_at_zero_eigenvalues(spec)).tolist(),
        "kappa": asdict(kappas),
        "sigma": {},
        "sigma_star": {},
        "config": run_config.to_dict(),
        "version": VERSION,
    }
    entries = [(i, j) for i, j in LEADING_ENTRIES if j <= params.n_blocks]
    if theta < 1.0:
        for i, j in entries:
            summary["sigma"][f"{i}_{j}"] = {"finite": inverse_I_minus_A_entry(spec, i, j),
                                            "limit": sigma_limit_entry(params, i, j)}
    if regime == REGIME_LOW:
        for i, j in entries:
            summary["sigma_star"][f"{i}_{j}"] = {"finite": sigma_star_finite_entry(params, kappas.m_star, i, j),
                                                 "limit": sigma_star_entry(params, kappas.m_star, i, j)}
    if params.beta > 2.0 * params.alpha > 0.0:
        summary["minimizers"] = classify_minimizers(params).to_dict()

    print(f"blockspin {VERSION}: beta={params.beta} alpha={params.alpha} N={params.n_spins} s={params.n_blocks}")
    print(f"regime: {regime} (beta + 2 alpha - 1 = {summary['gap']:+.3e})")
    print(f"m*: {summary['m_star']:.12f}")
    print(f"eigenvalues of A: [{lambdas.min():.6f}, {lambdas.max():.6f}]")
    print(f"Hessian at zero: [{min(summary['hessian_at_zero']):.6f}, {max(summary['hessian_at_zero']):.6f}]")
    print(f"kappa1: {kappas.kappa1}  kappa5: {kappas.kappa5}")
    for name in ("sigma", "sigma_star"):
        for key, value in summary[name].items():
            print(f"{name}_{key}: finite {value['finite']:.6f}, limit {value['limit']:.6f}")
    write_json(run_config.out / "analyze.json", summary)
    return EXIT_OK


def cmd_simulate(run_config):
    """Replica chains, sample dump, diagnostics and a trajectory heatmap"""
    params = run_config.model_params()
    config = run_config.sampler_config()
    out = run_config.out
    fmt = run_config.run["format"]
    logger.info(f"Simulating {params} with {run_config.n_replicas} replicas")
    samples = run_replicas(params, config, run_config.n_replicas, run_config.threads)

    if fmt == "json":
        write_json(out / "samples.json", [{"replica": c.replica, "sweeps": c.sweeps, "values": c.values} for c in samples])
    else:
        dump_samples(samples, out / f"samples.{fmt}", fmt)
    if config.n_samples >= MIN_SAMPLES:
        report = {f"replica_{c.replica}": diagnostics(c.values).to_dict() for c in samples}
        if len(samples) > 1:
            report["multi_chain_rhat"] = [multi_chain_rhat([c.values[:, k] for c in samples])
                                          for k in range(params.n_blocks)]
        write_json(out / "diagnostics.json", report)
    else:
        logger.warning(f"Skipping diagnostics: fewer than {MIN_SAMPLES} samples per replica")
    first = samples[0]
    trajectory_heatmap(first.sweeps, first.values, out / "trajectory.svg",
                       title=f"beta={params.beta}, alpha={params.alpha}, N={params.n_spins}, s={params.n_blocks}")
    _echo_config(run_config)
    return EXIT_OK


def cmd_exact(run_config):
    """Exact law, moments and the transfer-matrix partition function"""
    params = run_config.model_params()
    out = run_config.out
    d = min(int(run_config.experiment["d"]), params.n_blocks)
    law = exact_law(params, budget=run_config.run["budget"], threads=run_config.threads)
    mean, cov = exact_moments(law, d)
    summary = {
        "params": params.to_dict(),
        "n_states": n_lattice_states(params),
        "log_Z": law.log_Z,
        "log_Z_transfer": log_partition(ChainSpec.from_params(params)),
        "mean": mean,
        "rescaled_covariance": params.block_size * cov,
        "transfer": total_magnetization_stats(ChainSpec.from_params(params))._asdict(),
        "config": run_config.to_dict(),
        "version": VERSION,
    }
    print(f"log Z = {law.log_Z:.12f} over {len(law)} lattice states")
    if run_config.run["format"] == "csv":
        dump_csv(law, out / "law.csv")
    write_json(out / "exact.json", summary)
    return EXIT_OK


def _export(reports, metrics_file):
    if not metrics_file:
        return
    for report in reports:
        set_report_metrics(report)
    write_metrics_file(metrics_file)


def _exit_code(reports):
    """1 if any report failed, 4 if none failed but one is inconclusive, else 0"""
    statuses = {report.status for report in reports}
    if STATUS_FAIL in statuses:
        return EXIT_FAILED
    if STATUS_INCONCLUSIVE in statuses:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_verify(suite, run_config, metrics_file=None):
    """Run a suite; exit 0 iff every report passes"""
    reports = run_suite(suite, run_config.sampler_config(), threads=run_config.threads,
                        experiment=run_config.experiment, n_replicas=run_config.n_replicas)
    resolved = run_config.to_dict()
    for index, report in enumerate(reports):
        report.config = {**report.config, "resolved": resolved}
        report.write(run_config.out / "reports" / f"{index:02d}_{report.experiment}.json")
        print(f"{report.experiment}: {report.status} ({len(report.verdicts)} criteria, {report.runtime_s:.1f}s)")
    _echo_config(run_config)
    _export(reports, metrics_file)
    return _exit_code(reports)


def cmd_sweep(run_config, metrics_file=None):
    """Phase sweep: grid CSV, heatmap SVG and the ridge report"""
    model = run_config.model
    experiment = run_config.experiment
    report, rows = phase_sweep(experiment["beta_grid"] or DEFAULT_BETA_GRID,
                               experiment["alpha_grid"] or DEFAULT_ALPHA_GRID,
                               model["n_spins"], model["n_blocks"], run_config.sampler_config(),
                               threshold=experiment["threshold"], threads=run_config.threads)
    report.config = {**report.config, "resolved": run_config.to_dict()}
    out = run_config.out
    write_csv(out / "sweep.csv", SWEEP_HEADER, rows)
    phase_heatmap(rows, out / "phase.svg", title=f"N={model['n_spins']}, s={model['n_blocks']}")
    report.write(out / "sweep.json")
    _echo_config(run_config)
    _export([report], metrics_file)
    print(f"phase_sweep: {report.status} over {len(rows)} grid points")
    return _exit_code([report])


def run(args):
    run_config = resolve_config(args.config, _overrides(args))
    if args.command == 'analyze':
        return cmd_analyze(run_config)
    if args.command == 'simulate':
        code = cmd_simulate(run_config)
        _export([], args.metrics_file)
        return code
    if args.command == 'exact':
        return cmd_exact(run_config)
    if args.command == 'verify':
        return cmd_verify(args.suite, run_config, args.metrics_file)
    return cmd_sweep(run_config, args.metrics_file)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    # Set logging level based on command line argument
    logging.getLogger().setLevel(getattr(logging, args.log_level.upper()))
    logger.info(f"Starting blockspin {VERSION} command {args.command}")
    try:
        return run(args)
    except BlockspinError as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_USAGE
    except OSError as e:
        logger.error(f"{args.command} could not write its output: {e}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
