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

Experiment reports

A report carries every estimate with its standard error, the analytic
references it is compared against and one verdict per criterion, each citing
its tolerance. Estimates backed by fewer than MIN_ESS effective samples make
the whole report inconclusive rather than failed.

"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from utils.common import VERSION
from utils.io import to_json, write_json

logger = logging.getLogger(__name__)

MIN_ESS = 100

STATUS_PASS = "pass"
STATUS_FAIL = "fail"
STATUS_INCONCLUSIVE = "inconclusive"


@dataclass
class Estimate:
    value: float
    se: float
    ess: Optional[float] = None
    ci: Optional[List[float]] = None

    @property
    def low_ess(self):
        return self.ess is not None and self.ess < MIN_ESS

    def to_dict(self):
        data = {"value": float(self.value), "se": float(self.se)}
        if self.ess is not None:
            data["ess"] = float(self.ess)
        if self.ci is not None:
            data["ci"] = [float(v) for v in self.ci]
        return data


@dataclass
class Verdict:
    passed: Optional[bool]
    tolerance: str
    detail: str = ""

    @property
    def status(self):
        if self.passed is None:
            return STATUS_INCONCLUSIVE
        return STATUS_PASS if self.passed else STATUS_FAIL

    def to_dict(self):
        return {"status": self.status, "tolerance": self.tolerance, "detail": self.detail}


@dataclass
class ExperimentReport:
    experiment: str
    params: Dict
    seeds: List[int] = field(default_factory=list)
    estimates: Dict[str, Estimate] = field(default_factory=dict)
    references: Dict[str, float] = field(default_factory=dict)
    verdicts: Dict[str, Verdict] = field(default_factory=dict)
    runtime_s: float = 0.0
    config: Dict = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)
    version: str = VERSION

    def add_estimate(self, name, value, se, ess=None, ci=None):
        self.estimates[name] = Estimate(float(value), float(se), None if ess is None else float(ess), ci)
        return self.estimates[name]

    def add_reference(self, name, value):
        self.references[name] = float(value)

    def check(self, name, passed, tolerance, detail=""):
        self.verdicts[name] = Verdict(None if passed is None else bool(passed), tolerance, detail)
        if passed is False:
            logger.warning(f"{self.experiment}: criterion {name} failed ({tolerance}; {detail})")
        return self.verdicts[name]

    @property
    def low_ess_estimates(self):
        return [name for name, estimate in self.estimates.items() if estimate.low_ess]

    @property
    def status(self):
        if self.low_ess_estimates:
            return STATUS_INCONCLUSIVE
        statuses = {v.status for v in self.verdicts.values()}
        if STATUS_FAIL in statuses:
            return STATUS_FAIL
        if STATUS_INCONCLUSIVE in statuses:
            return STATUS_INCONCLUSIVE
        return STATUS_PASS

    @property
    def passed(self):
        return self.status == STATUS_PASS

    def to_dict(self):
        return {
            "experiment": self.experiment,
            "params": self.params,
            "seeds": list(self.seeds),
            "estimates": {name: e.to_dict() for name, e in self.estimates.items()},
            "references": dict(self.references),
            "verdicts": {name: v.to_dict() for name, v in self.verdicts.items()},
            "status": self.status,
            "low_ess": self.low_ess_estimates,
            "runtime_s": self.runtime_s,
            "config": self.config,
            "notes": list(self.notes),
            "version": self.version,
        }

    def to_json(self):
        return to_json(self.to_dict())

    def write(self, path):
        write_json(path, self.to_dict())
        logger.info(f"Report {self.experiment} ({self.status}) written to {path}")
