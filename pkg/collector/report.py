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

Experiment report metrics for blockspin

"""

import logging

from prometheus_client import write_to_textfile

from collector.metrics import get_gauge
from globals import registry
from harness.report import STATUS_FAIL, STATUS_PASS
from utils.common import flatten_dict, metric_safe
from utils.io import ensure_parent

logger = logging.getLogger(__name__)

VERDICT_VALUES = {STATUS_PASS: 1, STATUS_FAIL: 0}


def _set_params(report, experiment):
    gauge = get_gauge("blockspin_param", "Model parameter of an experiment", ("experiment", "name"))
    for key, value in flatten_dict(report.params).items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            logger.debug(f"Skipping non-numeric parameter {key} of {experiment}")
            continue
        gauge.labels(experiment=experiment, name=key).set(value)


def set_report_metrics(report):
    """Expose the estimates, references, verdicts and runtime of a report as gauges"""
    experiment = metric_safe(report.experiment)
    estimate = get_gauge("blockspin_estimate", "Monte-Carlo or exact estimate", ("experiment", "name"))
    estimate_se = get_gauge("blockspin_estimate_se", "Standard error of an estimate", ("experiment", "name"))
    reference = get_gauge("blockspin_reference", "Analytic reference value", ("experiment", "name"))
    verdict = get_gauge("blockspin_verdict", "Criterion verdict: 1 pass, 0 fail, -1 inconclusive",
                        ("experiment", "criterion"))

    for name, value in report.estimates.items():
        estimate.labels(experiment=experiment, name=metric_safe(name)).set(value.value)
        estimate_se.labels(experiment=experiment, name=metric_safe(name)).set(value.se)
    for name, value in report.references.items():
        reference.labels(experiment=experiment, name=metric_safe(name)).set(value)
    for name, value in report.verdicts.items():
        verdict.labels(experiment=experiment, criterion=metric_safe(name)).set(VERDICT_VALUES.get(value.status, -1))

    get_gauge("blockspin_report_status", "Report status: 1 pass, 0 fail, -1 inconclusive", ("experiment",)) \
        .labels(experiment=experiment).set(VERDICT_VALUES.get(report.status, -1))
    get_gauge("blockspin_runtime_seconds", "Experiment wall-clock runtime", ("experiment",)) \
        .labels(experiment=experiment).set(report.runtime_s)
    _set_params(report, experiment)
    logger.debug(f"Exported {len(report.estimates)} estimates of {experiment}")


def write_metrics_file(path):
    """Write the registry in the Prometheus text exposition format"""
    ensure_parent(path)
    write_to_textfile(str(path), registry)
    logger.info(f"Metrics written to {path}")
