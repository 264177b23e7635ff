"""Reading and writing configurations, sample collections, and polylines.

Single configuration: CSV with one row per landmark and columns x[,y[,z]]
(header row optional on input, written on output), or JSON with a
"landmarks" field holding an array of landmark rows.  Files store landmarks
as rows; in memory configurations are m-by-k with landmarks as columns.

Collections add a grouping column / wrapper:
  * samples CSV: header config_id,x[,y[,z]]; consecutive rows with the same
    id form one configuration, in order of first appearance.
  * samples JSON: {"configurations": [[[x, y], ...], ...]}.
  * polylines use the same layout with polyline_id / "polylines".

All writers print floats with 17 significant digits so values round-trip
exactly.
"""

import csv
import json

import numpy as np

from .errors import InvalidArgumentError, MalformedRowError


def format_float(x):
    """Render a float with enough digits to round-trip exactly."""
    return f"{float(x):.17g}"


def _parse_numeric_row(row, line_number, expected=None):
    try:
        values = [float(field) for field in row]
    except ValueError:
        raise MalformedRowError(line_number, f"non-numeric field in {row!r}") from None
    if expected is not None and len(values) != expected:
        raise MalformedRowError(
            line_number, f"expected {expected} fields, got {len(values)}"
        )
    return values


def _is_header(row):
    try:
        [float(field) for field in row]
    except ValueError:
        return True
    return False


def _landmark_header(m):
    if m > 3:
        raise InvalidArgumentError(f"landmark files support at most 3 coordinates, got {m}")
    return ["x", "y", "z"][:m]


def read_configuration(path):
    """Read one configuration; returns an m-by-k float matrix."""
    if str(path).lower().endswith(".json"):
        with open(path) as fh:
            payload = json.load(fh)
        rows = payload["landmarks"] if isinstance(payload, dict) else payload
        return np.asarray(rows, dtype=float).T
    landmarks = []
    width = None
    with open(path, newline="") as fh:
        for line_number, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not field.strip() for field in row):
                continue
            if line_number == 1 and _is_header(row):
                continue
            values = _parse_numeric_row(row, line_number, expected=width)
            width = len(values)
            landmarks.append(values)
    if not landmarks:
        raise MalformedRowError(1, "no landmark rows found")
    return np.asarray(landmarks, dtype=float).T


def write_configuration(path, config):
    """Write one configuration as a landmark-per-row CSV."""
    config = np.asarray(config, dtype=float)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_landmark_header(config.shape[0]))
        for landmark in config.T:
            writer.writerow([format_float(v) for v in landmark])


def read_samples(path):
    """Read a collection of configurations; returns a list of m-by-k matrices."""
    if str(path).lower().endswith(".json"):
        with open(path) as fh:
            payload = json.load(fh)
        entries = payload["configurations"] if isinstance(payload, dict) else payload
        return [np.asarray(rows, dtype=float).T for rows in entries]
    return [group.T for group in _read_grouped_csv(path)]


def write_samples(path, samples):
    """Write configurations to a config_id-grouped CSV."""
    samples = [np.asarray(s, dtype=float) for s in samples]
    m = samples[0].shape[0] if samples else 2
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["config_id"] + _landmark_header(m))
        for index, config in enumerate(samples):
            for landmark in config.T:
                writer.writerow([index] + [format_float(v) for v in landmark])


def _read_grouped_csv(path, allow_empty=False):
    """Rows grouped by a leading id column; groups in order of appearance."""
    groups = []
    order = {}
    width = None
    with open(path, newline="") as fh:
        for line_number, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not field.strip() for field in row):
                continue
            if line_number == 1 and _is_header(row):
                continue
            if len(row) < 2:
                raise MalformedRowError(line_number, f"expected id plus coordinates, got {row!r}")
            key = row[0].strip()
            values = _parse_numeric_row(row[1:], line_number, expected=width)
            width = len(values)
            if key not in order:
                order[key] = len(groups)
                groups.append([])
            groups[order[key]].append(values)
    if not groups and not allow_empty:
        raise MalformedRowError(1, "no data rows found")
    return [np.asarray(g, dtype=float) for g in groups]


def read_polylines(path):
    """Read polylines as a list of (N_i, 2) vertex arrays (no validation here).

    An empty file (or one holding only a header) yields an empty list.
    """
    if str(path).lower().endswith(".json"):
        with open(path) as fh:
            payload = json.load(fh)
        entries = payload["polylines"] if isinstance(payload, dict) else payload
        return [np.asarray(rows, dtype=float) for rows in entries]
    return _read_grouped_csv(path, allow_empty=True)


def write_polylines(path, polylines):
    """Write vertex arrays to a polyline_id-grouped CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["polyline_id", "x", "y"])
        for index, points in enumerate(polylines):
            for vertex in np.asarray(points, dtype=float):
                writer.writerow([index] + [format_float(v) for v in vertex])


def write_json(path, payload):
    """Write a JSON document with stable key order and a trailing newline."""
    text = json.dumps(payload, indent=2, sort_keys=True)
    with open(path, "w") as fh:
        fh.write(text + "\n")
