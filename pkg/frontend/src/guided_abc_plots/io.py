"""Readers for the run CSV formats, with column validation."""

import csv
import glob

import numpy as np

REPORT_COLUMNS = ("run", "t", "delta", "n_proposals", "acceptance_rate",
                  "ess", "n_sims", "wallclock_s")
WASSERSTEIN_COLUMNS = ("file", "run", "t", "m", "w1")


class MissingColumnError(ValueError):
    """A required column is absent from an input file."""

    def __init__(self, path, column):
        super().__init__(f"{path} is missing column {column!r}")
        self.path = path
        self.column = column


def _read_rows(path, required, numeric):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in required:
            if column not in header:
                raise MissingColumnError(path, column)
        rows = []
        for row in reader:
            rows.append({k: (float(row[k]) if k in numeric else row[k])
                         for k in header})
    return rows


def read_report(path):
    """Report rows as a list of dicts with numeric fields parsed."""
    numeric = set(REPORT_COLUMNS) - {"run", "t"}
    rows = _read_rows(path, REPORT_COLUMNS, numeric)
    for row in rows:
        row["run"] = int(row["run"])
        row["t"] = int(row["t"])
    return rows


def read_particles(path):
    """Particle file as (thetas, weights, distances)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None) or []
        theta_cols = [i for i, name in enumerate(header) if name.startswith("theta_")]
        if not theta_cols:
            raise MissingColumnError(path, "theta_1")
        for column in ("weight", "distance"):
            if column not in header:
                raise MissingColumnError(path, column)
        w_col = header.index("weight")
        d_col = header.index("distance")
        data = np.asarray([[float(v) for v in row] for row in reader])
    return data[:, theta_cols], data[:, w_col], data[:, d_col]


def read_wasserstein(path):
    """Comparison rows (run, t, w1) from the compare subcommand's CSV."""
    rows = _read_rows(path, WASSERSTEIN_COLUMNS, {"m", "w1"})
    for row in rows:
        row["run"] = int(row["run"])
        row["t"] = int(row["t"])
    return rows


def expand_glob(pattern):
    paths = sorted(glob.glob(pattern))
    if not paths:
        raise FileNotFoundError(f"no files match {pattern!r}")
    return paths
