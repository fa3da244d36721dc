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

Static SVG heatmaps

Output is byte-stable for a fixed input: a fixed hash salt for element ids
and no creation date in the metadata.

"""

import logging

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from utils.io import ensure_parent  # noqa: E402

logger = logging.getLogger(__name__)

SVG_HASH_SALT = "blockspin"
TRAJECTORY_CMAP = "RdBu_r"
PHASE_CMAP = "viridis"


def _save_svg(fig, path):
    ensure_parent(path)
    with plt.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "path"}):
        fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    logger.info(f"Heatmap written to {path}")


def trajectory_heatmap(sweeps, values, path, title=None):
    """Blocks-by-time heatmap of block magnetizations on a fixed [-1, 1] diverging scale"""
    values = np.asarray(values, dtype=float)
    sweeps = np.asarray(sweeps)
    fig, ax = plt.subplots(figsize=(8, 3))
    first, last = float(sweeps[0]), float(sweeps[-1])
    if last == first:
        # a single sample still needs a cell of positive width
        first, last = first - 0.5, last + 0.5
    extent = [first, last, values.shape[1] + 0.5, 0.5]
    im = ax.imshow(values.T, aspect="auto", cmap=TRAJECTORY_CMAP, vmin=-1.0, vmax=1.0,
                   interpolation="nearest", extent=extent)
    ax.set_xlabel("sweep")
    ax.set_ylabel("block")
    if title:
        ax.set_title(title)
    fig.colorbar(im, ax=ax, label="block magnetization")
    _save_svg(fig, path)


def phase_heatmap(rows, path, value_index=3, title=None):
    """
    E|m_bar| over the (beta, alpha) grid with the line beta + 2 alpha = 1

    rows follow harness.experiments.SWEEP_HEADER.
    """
    rows = np.asarray(rows, dtype=float)
    betas = np.unique(rows[:, 0])
    alphas = np.unique(rows[:, 1])
    grid = np.full((alphas.size, betas.size), np.nan)
    for row in rows:
        grid[np.searchsorted(alphas, row[1]), np.searchsorted(betas, row[0])] = row[value_index]

    fig, ax = plt.subplots(figsize=(6, 5))
    im = ax.pcolormesh(_edges(betas), _edges(alphas), np.ma.masked_invalid(grid), cmap=PHASE_CMAP,
                       vmin=0.0, vmax=1.0, shading="flat")
    line = np.linspace(betas[0], betas[-1], 50)
    ax.plot(line, (1.0 - line) / 2.0, color="white", linestyle="--", linewidth=1.0)
    ax.set_xlim(_edges(betas)[0], _edges(betas)[-1])
    ax.set_ylim(_edges(alphas)[0], _edges(alphas)[-1])
    ax.set_xlabel("beta")
    ax.set_ylabel("alpha")
    if title:
        ax.set_title(title)
    fig.colorbar(im, ax=ax, label="E|m_bar|")
    _save_svg(fig, path)


def _edges(centres):
    if centres.size == 1:
        return np.array([centres[0] - 0.5, centres[0] + 0.5])
    middle = (centres[1:] + centres[:-1]) / 2.0
    return np.concatenate([[2 * centres[0] - middle[0]], middle, [2 * centres[-1] - middle[-1]]])
