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

Get-or-create helpers for metrics on the blockspin registry

"""

import logging

from prometheus_client import Counter, Gauge

from globals import counters, gauges, registry

logger = logging.getLogger(__name__)


def get_gauge(metric_name, documentation, labelnames=()):
    """Return the cached gauge, creating it on the blockspin registry on first use"""
    if metric_name not in gauges:
        try:
            gauges[metric_name] = Gauge(metric_name, documentation, list(labelnames), registry=registry)
        except ValueError:
            # Gauge might already exist in registry, try to get it
            gauges[metric_name] = registry._names_to_collectors.get(metric_name)
    return gauges[metric_name]


def get_counter(metric_name, documentation, labelnames=()):
    """Return the cached counter, creating it on the blockspin registry on first use"""
    if metric_name not in counters:
        try:
            counters[metric_name] = Counter(metric_name, documentation, list(labelnames), registry=registry)
        except ValueError:
            # Counter registers under both the bare and the _total name
            counters[metric_name] = registry._names_to_collectors.get(f"{metric_name}_total") \
                or registry._names_to_collectors.get(metric_name)
    return counters[metric_name]


def reset_metrics():
    """Unregister every blockspin metric and clear the caches"""
    for collector in list(registry._collector_to_names.keys()):
        try:
            registry.unregister(collector)
        except KeyError:
            pass
    gauges.clear()
    counters.clear()
