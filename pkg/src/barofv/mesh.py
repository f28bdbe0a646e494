"""Structured periodic meshes and piecewise-constant cell fields.

The mesh is a uniform tensor product of cells per axis with periodic wrap
on every axis.  Scalar and vector unknowns are collocated at cell centers
and stored as arrays shaped like the cell grid; the flat cell ordering is
axis 0 fastest (Fortran ravel order), which is also the order used by all
CSV output.

Meshes are frozen; fields are treated as immutable after construction
(operators return new fields), so both are safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "StructuredMesh",
    "CellField",
    "CellVectorField",
    "project_initial",
]


@dataclass(frozen=True)
class StructuredMesh:
    """Uniform tensor-product cell grid with periodic faces on every axis.

    Parameters
    ----------
    cells_per_axis : tuple of int
        Number of cells along each axis (length = dim, 1 <= dim <= 3).
    lower, upper : tuple of float
        Domain bounds per axis.
    """

    cells_per_axis: tuple
    lower: tuple
    upper: tuple

    def __post_init__(self):
        shape = tuple(int(n) for n in np.atleast_1d(self.cells_per_axis))
        lo = tuple(float(x) for x in np.atleast_1d(self.lower))
        hi = tuple(float(x) for x in np.atleast_1d(self.upper))
        if not 1 <= len(shape) <= 3:
            raise ValueError("mesh dimension must be 1, 2 or 3")
        if len(lo) != len(shape) or len(hi) != len(shape):
            raise ValueError("bounds must match the number of axes")
        if any(n < 1 for n in shape):
            raise ValueError("need at least one cell per axis")
        if any(h <= l for l, h in zip(lo, hi)):
            raise ValueError("upper bound must exceed lower bound")
        object.__setattr__(self, "cells_per_axis", shape)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self):
        return len(self.cells_per_axis)

    @property
    def shape(self):
        return self.cells_per_axis

    @property
    def ncells(self):
        return int(np.prod(self.cells_per_axis))

    @property
    def spacing(self):
        return tuple(
            (hi - lo) / n
            for lo, hi, n in zip(self.lower, self.upper, self.cells_per_axis)
        )

    @property
    def cell_volume(self):
        """Cell measure |K| (identical for every cell)."""
        return float(np.prod(self.spacing))

    def face_area(self, axis):
        """Face measure |sigma| for faces normal to `axis`."""
        return self.cell_volume / self.spacing[axis]

    @property
    def nfaces(self):
        """Interior faces; each cell owns one +face per axis under periodicity."""
        return self.dim * self.ncells

    def axis_centers(self, axis):
        n = self.cells_per_axis[axis]
        h = self.spacing[axis]
        return self.lower[axis] + h * (np.arange(n) + 0.5)

    def cell_centers(self):
        """Cell-center coordinates, shape ``(dim,) + shape``."""
        grids = np.meshgrid(
            *[self.axis_centers(a) for a in range(self.dim)], indexing="ij"
        )
        return np.stack(grids)

    def flat_index_grid(self):
        """Flat cell ids arranged on the grid (axis 0 fastest)."""
        return np.arange(self.ncells).reshape(self.shape, order="F")

    def neighbor_flat(self, axis, step):
        """Flat id of the cell `step` cells away along `axis`, per cell (periodic)."""
        idx = self.flat_index_grid()
        return np.roll(idx, -step, axis=axis).ravel(order="F")

    def refinement_ratio(self, fine):
        """Per-axis ratio of a dyadically nested finer mesh, or None if not nested."""
        if fine.dim != self.dim:
            return None
        for lo_c, lo_f, hi_c, hi_f in zip(self.lower, fine.lower, self.upper, fine.upper):
            if abs(lo_c - lo_f) > 1e-12 or abs(hi_c - hi_f) > 1e-12:
                return None
        ratios = []
        for nc, nf in zip(self.cells_per_axis, fine.cells_per_axis):
            if nf % nc != 0:
                return None
            r = nf // nc
            if r & (r - 1):  # power of two
                return None
            ratios.append(r)
        return tuple(ratios)


def _check_mesh_values(mesh, values, vector):
    values = np.asarray(values, dtype=float)
    expected = ((mesh.dim,) + mesh.shape) if vector else mesh.shape
    if values.shape != expected:
        raise ValueError(f"values shape {values.shape} does not match mesh {expected}")
    return values


@dataclass
class CellField:
    """One scalar value per cell, shaped like the mesh grid."""

    mesh: StructuredMesh
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = _check_mesh_values(self.mesh, self.values, vector=False)

    @classmethod
    def full(cls, mesh, value):
        return cls(mesh, np.full(mesh.shape, float(value)))

    @classmethod
    def from_flat(cls, mesh, flat):
        return cls(mesh, np.asarray(flat, dtype=float).reshape(mesh.shape, order="F"))

    @property
    def flat(self):
        """Values in flat cell order (axis 0 fastest)."""
        return self.values.ravel(order="F")

    def copy(self):
        return CellField(self.mesh, self.values.copy())

    def integral(self):
        return self.mesh.cell_volume * float(np.sum(self.values))


@dataclass
class CellVectorField:
    """One d-vector per cell; component arrays stacked along the first axis."""

    mesh: StructuredMesh
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = _check_mesh_values(self.mesh, self.values, vector=True)

    @classmethod
    def zeros(cls, mesh):
        return cls(mesh, np.zeros((mesh.dim,) + mesh.shape))

    def component(self, axis):
        return CellField(self.mesh, self.values[axis].copy())

    @property
    def flat(self):
        """Components in flat cell order, shape (dim, ncells)."""
        return self.values.reshape(self.mesh.dim, -1, order="F")

    def copy(self):
        return CellVectorField(self.mesh, self.values.copy())


# Fixed per-cell quadrature for projecting initial data: 4 equispaced
# subsamples per axis (midpoints of a 4^dim subgrid).  Exact for data that
# is constant on the cell, second order for smooth data.
_NSUB = 4


def project_initial(f, mesh):
    """Project a pointwise state function onto cell averages.

    `f` takes points of shape ``(dim, npts)`` and returns either ``(npts,)``
    (scalar data -> CellField) or ``(dim, npts)`` (vector data ->
    CellVectorField).  Each cell value is the average of `f` over the fixed
    subsample grid of the cell.
    """
    axes_sub = []
    for a in range(mesh.dim):
        h = mesh.spacing[a]
        n = mesh.cells_per_axis[a]
        edges = mesh.lower[a] + h * np.arange(n)
        offs = h * (np.arange(_NSUB) + 0.5) / _NSUB
        axes_sub.append((edges[:, None] + offs[None, :]).ravel())  # (n*_NSUB,)

    grids = np.meshgrid(*axes_sub, indexing="ij")
    pts = np.stack([g.ravel() for g in grids])  # (dim, total subsamples)
    out = np.asarray(f(pts), dtype=float)

    # gather the subsamples of each cell on the last axis, then sort before
    # averaging: the cell value depends only on the value multiset, which
    # keeps projections of symmetric data exactly symmetric
    inner_shape = tuple(s for n in mesh.shape for s in (n, _NSUB))
    cell_axes = tuple(2 * a for a in range(mesh.dim))
    sub_axes = tuple(2 * a + 1 for a in range(mesh.dim))

    def reduce_cells(arr):
        arr = arr.reshape(inner_shape).transpose(cell_axes + sub_axes)
        arr = arr.reshape(mesh.shape + (_NSUB**mesh.dim,))
        return np.sort(arr, axis=-1).mean(axis=-1)

    if out.shape == pts.shape[1:]:
        return CellField(mesh, reduce_cells(out))
    if out.shape == (mesh.dim,) + pts.shape[1:]:
        cell = np.stack([reduce_cells(out[c]) for c in range(mesh.dim)])
        return CellVectorField(mesh, cell)
    raise ValueError(f"initial data function returned unexpected shape {out.shape}")
