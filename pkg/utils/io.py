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

Output formats for blockspin: CSV, binary sample frames and JSON

CSV always carries a header row, uses '.' as decimal separator and '\n' line
endings, and prints floats in their shortest round-trip form.

"""

import csv
import json
import logging
import math
import os

import numpy as np

logger = logging.getLogger(__name__)


def format_value(value):
    """Platform-independent text form of a CSV cell"""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def ensure_parent(path):
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)


def write_csv(path, header, rows):
    """Write rows under a header; returns the number of data rows written"""
    ensure_parent(path)
    count = 0
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
            count += 1
    logger.debug(f"Wrote {count} rows to {path}")
    return count


def read_csv(path):
    """Read a CSV written by write_csv into (header, float array)"""
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    return header, np.array(rows, dtype=float).reshape(len(rows), len(header))


def write_binary_frames(path, array):
    """Little-endian float64 frames, row-major"""
    ensure_parent(path)
    data = np.ascontiguousarray(np.asarray(array, dtype="<f8"))
    with open(path, "wb") as handle:
        handle.write(data.tobytes(order="C"))
    logger.debug(f"Wrote {data.shape} binary frame to {path}")


def read_binary_frames(path, n_columns):
    return np.fromfile(path, dtype="<f8").reshape(-1, n_columns)


def _json_default(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if hasattr(value, "to_dict"):
        return value.to_dict()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def to_json(obj):
    return json.dumps(obj, indent=2, default=_json_default, allow_nan=True)


def write_json(path, obj):
    ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(to_json(obj))
        handle.write("\n")
    logger.debug(f"Wrote JSON to {path}")
