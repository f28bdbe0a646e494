"""Readers for the solver's published CSV formats.

Snapshot files carry ``i,j,k,x,y,z,rho,u1,u2,u3,m1,m2,m3,p,E`` per cell;
error reports carry ``variable,k,E1..E6,rel_entropy_L1`` per resolution.
Inputs are never modified.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

SNAPSHOT_COLUMNS = [
    "i", "j", "k", "x", "y", "z",
    "rho", "u1", "u2", "u3", "m1", "m2", "m3", "p", "E",
]
ERROR_COLUMNS = ["E1", "E2", "E3", "E4", "E5", "E6"]


class Snapshot:
    """Cell data arranged on the structured grid inferred from the indices."""

    def __init__(self, shape, coords, fields):
        self.shape = shape          # active grid shape, e.g. (nx,) or (nx, ny)
        self.coords = coords        # per-axis cell-center coordinates
        self.fields = fields        # name -> array shaped like `shape`

    @property
    def dim(self):
        return len(self.shape)


def read_snapshot(path) -> Snapshot:
    path = Path(path)
    with path.open() as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != SNAPSHOT_COLUMNS:
            raise ValueError(f"{path} is not a snapshot CSV (unexpected header)")
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path} contains no cells")
    idx = np.array([[int(r[c]) for c in range(3)] for r in rows])
    vals = np.array([[float(v) for v in r[3:]] for r in rows])

    shape3 = idx.max(axis=0) + 1
    dim = 3
    while dim > 1 and shape3[dim - 1] == 1:
        dim -= 1
    shape = tuple(int(n) for n in shape3[:dim])

    flat = np.ravel_multi_index([idx[:, a] for a in range(dim)], shape, order="F")
    perm = np.argsort(flat)

    fields = {}
    for c, name in enumerate(SNAPSHOT_COLUMNS[3:]):
        if name in ("x", "y", "z"):
            continue
        fields[name] = vals[perm, c].reshape(shape, order="F")
    coords = []
    for a in range(dim):
        axis_vals = np.full(shape[a], np.nan)
        axis_vals[idx[:, a]] = vals[:, a]
        coords.append(axis_vals)
    return Snapshot(shape, coords, fields)


def read_error_report(path):
    """Rows of the error-report CSV as dicts keyed by column name."""
    path = Path(path)
    with path.open() as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in ("variable", "k") if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"{path} is not an error-report CSV (missing {missing})")
        rows = []
        for rec in reader:
            row = {"variable": rec["variable"], "k": int(rec["k"])}
            for c in ERROR_COLUMNS + ["rel_entropy_L1"]:
                if c in rec and rec[c] not in (None, ""):
                    row[c] = float(rec[c])
            rows.append(row)
    if not rows:
        raise ValueError(f"{path} contains no rows")
    return rows
