"""CSV and manifest I/O for runs, studies and error reports.

Snapshots carry one row per cell in flat index order (axis 0 fastest) with
the fixed header ``i,j,k,x,y,z,rho,u1,u2,u3,m1,m2,m3,p,E``; unused axes are
written as zeros.  Floats are written with ``repr`` so files round-trip
exactly and identical runs produce byte-identical output.
"""

from __future__ import annotations

import configparser
import csv
from pathlib import Path

import numpy as np

from .analysis import ErrorRow
from .eos import Eos
from .mesh import CellField, CellVectorField, StructuredMesh
from .stab import State, StepDiagnostics

__all__ = [
    "SNAPSHOT_HEADER",
    "RUN_LOG_HEADER",
    "ERROR_REPORT_HEADER",
    "write_snapshot",
    "read_snapshot",
    "write_run_log",
    "write_error_report",
    "read_error_report",
    "write_manifest",
    "read_manifest",
]

SNAPSHOT_HEADER = ["i", "j", "k", "x", "y", "z", "rho", "u1", "u2", "u3", "m1", "m2", "m3", "p", "E"]
RUN_LOG_HEADER = [
    "step", "t", "dt", "eta", "newton_iters", "residual",
    "mass", "mom1", "mom2", "mom3", "energy", "min_rho", "retries", "entropy_ok",
]
ERROR_REPORT_HEADER = ["variable", "k", "E1", "E2", "E3", "E4", "E5", "E6", "rel_entropy_L1"]


def _fmt(x):
    return repr(float(x))


def write_snapshot(path, state: State, eos: Eos):
    """Write one snapshot CSV in flat cell order."""
    mesh = state.mesh
    dim = mesh.dim
    idx = np.unravel_index(np.arange(mesh.ncells), mesh.shape, order="F")
    centers = mesh.cell_centers().reshape(dim, -1, order="F")
    rho = state.rho.flat
    u = state.u.flat
    p = eos.pressure(rho)
    energy = 0.5 * rho * np.sum(u**2, axis=0) + eos.pressure_potential(rho)

    def col(arrs, c):
        return arrs[c] if c < dim else np.zeros(mesh.ncells)

    ij = [idx[c] if c < dim else np.zeros(mesh.ncells, dtype=int) for c in range(3)]
    xyz = [col(centers, c) for c in range(3)]
    uu = [col(u, c) for c in range(3)]
    mm = [col(u, c) * rho if c < dim else np.zeros(mesh.ncells) for c in range(3)]

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SNAPSHOT_HEADER)
        for n in range(mesh.ncells):
            w.writerow(
                [int(ij[0][n]), int(ij[1][n]), int(ij[2][n])]
                + [_fmt(xyz[c][n]) for c in range(3)]
                + [_fmt(rho[n])]
                + [_fmt(uu[c][n]) for c in range(3)]
                + [_fmt(mm[c][n]) for c in range(3)]
                + [_fmt(p[n]), _fmt(energy[n])]
            )


def read_snapshot(path):
    """Reconstruct (mesh, State) from a snapshot CSV.

    The mesh geometry comes from the index and coordinate columns; this
    requires at least two cells per active axis.
    """
    path = Path(path)
    with path.open() as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != SNAPSHOT_HEADER:
            raise ValueError(f"unexpected snapshot header in {path}")
        rows = [row for row in r]
    idx = np.array([[int(row[c]) for c in range(3)] for row in rows], dtype=int)
    data = np.array([[float(v) for v in row[3:]] for row in rows])

    shape3 = idx.max(axis=0) + 1
    dim = 3
    while dim > 1 and shape3[dim - 1] == 1:
        dim -= 1
    shape = tuple(int(n) for n in shape3[:dim])
    if int(np.prod(shape)) != len(rows):
        raise ValueError("snapshot rows do not fill the index grid")

    lower, upper = [], []
    for a in range(dim):
        n = shape[a]
        if n < 2:
            raise ValueError("cannot infer spacing from a single-cell axis")
        first = data[idx[:, a] == 0][0, a]
        second = data[idx[:, a] == 1][0, a]
        h = second - first
        lower.append(first - 0.5 * h)
        upper.append(first - 0.5 * h + n * h)
    mesh = StructuredMesh(shape, tuple(lower), tuple(upper))

    order = np.ravel_multi_index([idx[:, a] for a in range(dim)], shape, order="F")
    perm = np.argsort(order)
    rho = CellField.from_flat(mesh, data[perm, 3])
    ucomp = np.stack([data[perm, 4 + c] for c in range(dim)])
    u = CellVectorField(mesh, ucomp.reshape((dim,) + mesh.shape, order="F"))
    return mesh, State(rho, u)


def write_run_log(path, diagnostics):
    """Write per-step diagnostics rows (list of StepDiagnostics)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RUN_LOG_HEADER)
        for n, d in enumerate(diagnostics, start=1):
            w.writerow(
                [
                    n, _fmt(d.time), _fmt(d.dt), _fmt(d.eta),
                    int(d.newton_iters), _fmt(d.newton_residual),
                    _fmt(d.mass), _fmt(d.momentum[0]), _fmt(d.momentum[1]), _fmt(d.momentum[2]),
                    _fmt(d.energy), _fmt(d.min_rho), int(d.dt_retries),
                    int(bool(d.entropy_ok)),
                ]
            )


def read_run_log(path):
    with Path(path).open() as fh:
        r = csv.DictReader(fh)
        return [row for row in r]


def write_error_report(path, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ERROR_REPORT_HEADER)
        for row in rows:
            w.writerow(
                [row.variable, int(row.k)]
                + [_fmt(v) for v in (row.E1, row.E2, row.E3, row.E4, row.E5, row.E6)]
                + [_fmt(row.rel_entropy_L1)]
            )


def read_error_report(path):
    rows = []
    with Path(path).open() as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                ErrorRow(
                    variable=rec["variable"],
                    k=int(rec["k"]),
                    E1=float(rec["E1"]),
                    E2=float(rec["E2"]),
                    E3=float(rec["E3"]),
                    E4=float(rec["E4"]),
                    E5=float(rec["E5"]),
                    E6=float(rec["E6"]),
                    rel_entropy_L1=float(rec["rel_entropy_L1"]),
                )
            )
    return rows


def write_manifest(path, section, values):
    """INI manifest with every parameter needed to reproduce the run."""
    cp = configparser.ConfigParser()
    cp[section] = {k: str(v) for k, v in values.items()}
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        cp.write(fh)


def read_manifest(path):
    cp = configparser.ConfigParser()
    with Path(path).open() as fh:
        cp.read_file(fh)
    section = cp.sections()[0]
    return section, dict(cp[section])
