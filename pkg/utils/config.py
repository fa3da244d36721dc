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

Run configuration: defaults < TOML/JSON file < command-line flags

"""

import json
import logging
import os
import tomllib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict

from errors import ConfigError
from model.core import ModelParams
from sampler.chain import SamplerConfig
from utils.common import VERSION

logger = logging.getLogger(__name__)

THREADS_ENV = "BLOCKSPIN_THREADS"

DEFAULTS = {
    "model": {
        "beta": 0.5,
        "alpha": 0.2,
        "n_spins": 800,
        "n_blocks": 8,
        "strict": True,
    },
    "sampler": {
        "seed": 0,
        "burn_in_sweeps": 100,
        "thinning_sweeps": 1,
        "n_samples": 1000,
        "init": "all_plus",
        "init_vector": None,
        "n_replicas": 4,
    },
    "experiment": {
        "eps": None,
        "delta": None,
        "d": 3,
        "n_ladder": None,
        "s_ladder": None,
        "ceiling": None,
        "sign_ceiling": None,
        "balance_replicas": None,
        "beta_grid": None,
        "alpha_grid": None,
        "threshold": 0.3,
    },
    "run": {
        "out": "out",
        "threads": 1,
        "format": "csv",
        "budget": 10 ** 8,
    },
}


def load_config_file(path):
    """Read a .toml or .json config file into a nested dict"""
    path = Path(path)
    suffix = path.suffix.lower()
    try:
        if suffix == ".toml":
            with open(path, "rb") as f:
                data = tomllib.load(f)
        elif suffix == ".json":
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        else:
            raise ConfigError(f"unsupported config format {suffix!r} for {path}; use .toml or .json")
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot parse {path}: {e}") from e
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must contain a table of sections")
    logger.debug(f"Loaded config file {path}: {data}")
    return data


def _merge(base, layer, source):
    merged = {section: dict(values) for section, values in base.items()}
    for section, values in layer.items():
        if section not in merged:
            raise ConfigError(f"unknown config section [{section}] in {source}")
        if not isinstance(values, dict):
            raise ConfigError(f"config section [{section}] in {source} must be a table")
        for key, value in values.items():
            if key not in merged[section]:
                raise ConfigError(f"unknown config key {section}.{key} in {source}")
            if value is not None:
                merged[section][key] = value
    return merged


def _threads_from_env(environ):
    raw = environ.get(THREADS_ENV)
    if raw is None:
        return None
    try:
        threads = int(raw)
    except ValueError as e:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from e
    if threads < 1:
        raise ConfigError(f"{THREADS_ENV} must be at least 1, got {threads}")
    return threads


@dataclass(frozen=True)
class RunConfig:
    model: Dict = field(default_factory=dict)
    sampler: Dict = field(default_factory=dict)
    experiment: Dict = field(default_factory=dict)
    run: Dict = field(default_factory=dict)

    def model_params(self):
        return ModelParams(**self.model)

    def sampler_config(self):
        options = {key: value for key, value in self.sampler.items() if key != "n_replicas"}
        return SamplerConfig(**options)

    @property
    def n_replicas(self):
        return int(self.sampler["n_replicas"])

    @property
    def threads(self):
        return int(self.run["threads"])

    @property
    def out(self):
        return Path(self.run["out"])

    def to_dict(self):
        return {
            "model": dict(self.model),
            "sampler": dict(self.sampler),
            "experiment": dict(self.experiment),
            "run": dict(self.run),
            "version": VERSION,
        }


def resolve_config(path=None, overrides=None, environ=None):
    """
    Merge defaults, the environment, an optional config file and flag overrides

    overrides is a nested dict shaped like the file; None values are ignored
    so unset flags never mask file values.
    """
    environ = os.environ if environ is None else environ
    merged = {section: dict(values) for section, values in DEFAULTS.items()}
    threads = _threads_from_env(environ)
    if threads is not None:
        merged["run"]["threads"] = threads
    if path is not None:
        merged = _merge(merged, load_config_file(path), str(path))
    if overrides:
        merged = _merge(merged, overrides, "command-line flags")
    return RunConfig(**merged)
