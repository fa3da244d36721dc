"""
Tests for the blockspin command line
"""

import json
import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

# Import after setting up path
from collector.metrics import reset_metrics
import harness.suites as suites
import main as cli
from harness.report import ExperimentReport
from main import EXIT_FAILED, EXIT_INCONCLUSIVE, EXIT_OK, EXIT_USAGE, main
from utils.io import read_csv
import logging


@pytest.fixture(autouse=True)
def quiet():
    reset_metrics()
    yield
    # main() sets the root level from --log-level
    logging.getLogger().setLevel(logging.ERROR)


def run_cli(*args):
    return main(list(args) + ['--log-level', 'ERROR'])


@pytest.mark.parametrize("beta,alpha,regime", [
    (0.5, 0.2, "high"),
    (0.8, 0.25, "low"),
    (0.6, 0.2, "critical"),
])
def test_analyze(tmp_path, beta, alpha, regime):
    code = run_cli('analyze', '--beta', str(beta), '--alpha', str(alpha), '--n-spins', '600', '--n-blocks', '6',
                   '--out', str(tmp_path))
    assert code == EXIT_OK
    summary = json.loads((tmp_path / "analyze.json").read_text())
    assert summary["regime"] == regime
    if regime == "low":
        assert summary["m_star"] == pytest.approx(0.7521, abs=1e-4)
        assert "1_1" in summary["sigma_star"]
    if regime == "high":
        assert summary["m_star"] == 0.0
        assert summary["sigma"]["1_2"]["finite"] > 0.0


def test_simulate_is_reproducible(tmp_path):
    outputs = []
    for name in ("a", "b"):
        out = tmp_path / name
        code = run_cli('simulate', '--beta', '0.5', '--alpha', '0.2', '--n-spins', '120', '--n-blocks', '4',
                       '--seed', '42', '--burn-in', '10', '--n-samples', '150', '--replicas', '2',
                       '--out', str(out), '--metrics-file', str(out / "metrics.prom"))
        assert code == EXIT_OK
        outputs.append(out)
    first, second = outputs
    assert (first / "samples.csv").read_bytes() == (second / "samples.csv").read_bytes()
    header, rows = read_csv(first / "samples.csv")
    assert header == ["sweep", "m_1", "m_2", "m_3", "m_4"]
    assert rows.shape == (300, 5)
    assert (first / "trajectory.svg").read_text().lstrip().startswith("<?xml")
    diagnostics = json.loads((first / "diagnostics.json").read_text())
    assert {"replica_0", "replica_1", "multi_chain_rhat"} <= set(diagnostics)
    assert json.loads((first / "config.json").read_text())["sampler"]["seed"] == 42
    assert "blockspin_sampler_sweeps_total" in (first / "metrics.prom").read_text()


def test_simulate_binary(tmp_path):
    code = run_cli('simulate', '--n-spins', '40', '--n-blocks', '4', '--n-samples', '20', '--replicas', '1',
                   '--burn-in', '0', '--format', 'bin', '--out', str(tmp_path))
    assert code == EXIT_OK
    assert (tmp_path / "samples.bin").stat().st_size == 20 * 5 * 8
    assert not (tmp_path / "diagnostics.json").exists()


def test_exact(tmp_path):
    code = run_cli('exact', '--beta', '0.8', '--alpha', '0.25', '--n-spins', '12', '--n-blocks', '3',
                   '--out', str(tmp_path))
    assert code == EXIT_OK
    summary = json.loads((tmp_path / "exact.json").read_text())
    assert summary["n_states"] == 125
    assert summary["log_Z"] == pytest.approx(summary["log_Z_transfer"], rel=1e-10)
    header, rows = read_csv(tmp_path / "law.csv")
    assert rows.shape[0] == 125


def test_exact_over_budget(tmp_path):
    code = run_cli('exact', '--n-spins', '400', '--n-blocks', '8', '--budget', '1000', '--out', str(tmp_path))
    assert code == EXIT_USAGE


def test_verify_closed_forms(tmp_path):
    code = run_cli('verify', 'closed-forms', '--out', str(tmp_path), '--metrics-file', str(tmp_path / "m.prom"))
    assert code == EXIT_OK
    report = json.loads((tmp_path / "reports" / "00_closed_forms.json").read_text())
    assert report["status"] == "pass"
    assert 'blockspin_report_status{experiment="closed_forms"} 1.0' in (tmp_path / "m.prom").read_text()


def test_sweep(tmp_path):
    code = run_cli('sweep', '--n-spins', '400', '--n-blocks', '4', '--n-samples', '1000', '--thinning', '2', '--burn-in', '50',
                   '--beta-grid', '0.3,1.2', '--alpha-grid', '0.05,0.1', '--out', str(tmp_path))
    assert code == EXIT_OK
    header, rows = read_csv(tmp_path / "sweep.csv")
    assert header[:3] == ["beta", "alpha", "theta"]
    assert rows.shape == (4, 8)
    assert (tmp_path / "phase.svg").exists()


@pytest.mark.parametrize("args", [
    ['analyze', '--beta', '0.3', '--alpha', '0.2'],
    ['analyze', '--n-spins', '801', '--n-blocks', '8'],
    ['simulate', '--init', 'from_vector', '--n-blocks', '4', '--n-spins', '40', '--init-vector', '1,0'],
])
def test_invalid_parameters(tmp_path, args):
    assert run_cli(*args, '--out', str(tmp_path)) == EXIT_USAGE


def test_unknown_config_format(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("beta: 0.5\n")
    assert run_cli('analyze', '--config', str(path), '--out', str(tmp_path)) == EXIT_USAGE


def test_relaxed_independent_blocks(tmp_path):
    code = run_cli('analyze', '--relaxed', '--beta', '0.5', '--alpha', '0', '--n-spins', '60', '--n-blocks', '3',
                   '--out', str(tmp_path))
    assert code == EXIT_OK
    summary = json.loads((tmp_path / "analyze.json").read_text())
    assert "minimizers" not in summary


def _report(name, status):
    report = ExperimentReport(experiment=name, params={})
    if status == "inconclusive":
        report.add_estimate("tail", 0.01, 0.001, ess=12.0)
    report.check("criterion", status != "fail", "synthetic")
    return report


@pytest.mark.parametrize("statuses,expected", [
    (["pass", "pass"], EXIT_OK),
    (["pass", "inconclusive"], EXIT_INCONCLUSIVE),
    (["inconclusive", "fail"], EXIT_FAILED),
])
def test_verify_exit_codes(tmp_path, monkeypatch, statuses, expected):
    reports = [_report(f"r{i}", status) for i, status in enumerate(statuses)]
    monkeypatch.setattr(cli, "run_suite", lambda *args, **kwargs: reports)
    assert run_cli('verify', 'lln', '--out', str(tmp_path)) == expected
    assert EXIT_INCONCLUSIVE not in (EXIT_OK, EXIT_FAILED, EXIT_USAGE)


def test_verify_passes_experiment_settings(tmp_path, monkeypatch):
    calls = {}

    def record(name):
        def experiment(params, eps, n_replicas, config, **kwargs):
            calls[name] = dict(kwargs, eps=eps, n_replicas=n_replicas, n_spins=params.n_spins)
            return _report(name, "pass")
        return experiment

    monkeypatch.setattr(suites, "lln_high_temperature", record("high"))
    monkeypatch.setattr(suites, "lln_low_temperature", record("low"))
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"experiment": {"sign_ceiling": 0.01, "eps": 0.3}}))
    code = run_cli('verify', 'lln', '--config', str(path), '--eps', '0.1', '--n-ladder', '480,960,1920',
                   '--ceiling', '0.2', '--balance-replicas', '7', '--replicas', '2', '--out', str(tmp_path))
    assert code == EXIT_OK
    high, low = calls["high"], calls["low"]
    assert high["eps"] == low["eps"] == 0.1
    assert high["n_ladder"] == low["n_ladder"] == (480, 960, 1920)
    assert high["n_spins"] == low["n_spins"] == 480
    assert high["ceiling"] == low["ceiling"] == 0.2
    assert high["n_replicas"] == 2
    assert low["sign_ceiling"] == 0.01
    assert low["balance_replicas"] == 7
    assert high["reference_ladder"] == (800, 1600, 3200)


def test_verify_keeps_suite_defaults_without_settings(tmp_path, monkeypatch):
    calls = {}

    def record(name):
        def experiment(params, eps, n_replicas, config, **kwargs):
            calls[name] = dict(kwargs, eps=eps)
            return _report(name, "pass")
        return experiment

    monkeypatch.setattr(suites, "lln_high_temperature", record("high"))
    monkeypatch.setattr(suites, "lln_low_temperature", record("low"))
    assert run_cli('verify', 'lln', '--out', str(tmp_path)) == EXIT_OK
    assert calls["high"]["eps"] == 0.2
    assert calls["high"]["n_ladder"] == (3200, 6400, 12800)
    assert calls["low"]["eps"] == 0.15
    assert calls["low"]["balance_replicas"] == 100
