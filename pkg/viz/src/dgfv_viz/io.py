"""CSV loading with schema validation for the solver's output files."""

from __future__ import annotations

import csv

import numpy as np

FIELD_COLUMNS = ["x", "y", "rho", "vx", "vy", "p", "alpha"]
HISTORY_COLUMNS = ["t", "mean_alpha", "dt", "step"]


class SchemaError(ValueError):
    """Input file does not match the documented output schema."""


def load_csv(path, required=None, min_rows=1):
    """Load a CSV with a header row into a dict of float arrays.

    Raises SchemaError when required columns are missing or there are fewer
    than ``min_rows`` data rows.
    """
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            rows = [row for row in reader if row]
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if header is None:
        raise SchemaError(f"{path}: empty file, expected a header row")
    if required:
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing}, found {header}")
    if len(rows) < min_rows:
        raise SchemaError(f"{path}: expected at least {min_rows} data rows, found {len(rows)}")
    try:
        data = np.array([[float(v) for v in row] for row in rows])
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric cell ({exc})") from exc
    if data.shape[1] != len(header):
        raise SchemaError(f"{path}: ragged rows")
    return {name: data[:, k] for k, name in enumerate(header)}


def load_field(path):
    return load_csv(path, required=FIELD_COLUMNS)


def load_history(path):
    return load_csv(path, required=HISTORY_COLUMNS)


def load_error_table(path):
    """Convergence-style table: degree and h columns plus one error column."""
    data = load_csv(path, required=["degree", "h"])
    for candidate in ("l2_rho_error", "l2_max", "error"):
        if candidate in data:
            return data, candidate
    numeric = [k for k in data if k not in ("degree", "h", "num_elements", "slope")]
    if not numeric:
        raise SchemaError(f"{path}: no error column found")
    return data, numeric[0]
