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

Exception hierarchy for blockspin

"""


class BlockspinError(Exception):
    """Base class for all blockspin errors"""


class ParameterError(BlockspinError, ValueError):
    """Invalid model parameters, dimensions, spins or lattice values"""


class RegimeError(BlockspinError, ValueError):
    """A closed form was requested outside its temperature regime"""


class BudgetExceededError(BlockspinError):
    """Exact enumeration would exceed the configured state budget"""

    def __init__(self, n_states, budget):
        super().__init__(f"enumeration needs {n_states} states, budget is {budget}; use the sampler instead")
        self.n_states = n_states
        self.budget = budget


class ConditioningError(BlockspinError):
    """Empty conditioning set or rejection acceptance rate too small"""


class DiagnosticsError(BlockspinError, ValueError):
    """Not enough samples for MCMC diagnostics"""


class ConfigError(BlockspinError, ValueError):
    """Unreadable config file, unknown keys or unknown suite"""
