"""Convergence diagnostics: multi-resolution injection, Cesaro averages,
first variances, 1D Wasserstein distances, relative entropy and the
E1..E6 error table.

All comparisons happen on the reference mesh: coarse snapshots are first
injected by piecewise-constant prolongation (exact for finite-volume data).
The per-point measure attached to refinement level j is the running average
of Dirac masses over levels 1..j; the reference solution carries the Dirac
measure at its own value, while the reference Cesaro average and variance
treat the reference as the last element of the refinement sequence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eos import Eos
from .mesh import CellField, CellVectorField, StructuredMesh

__all__ = [
    "AtomicMeasure",
    "wasserstein_1d",
    "inject_to_fine",
    "cesaro_average",
    "first_variance",
    "relative_entropy_field",
    "lp_norm",
    "Ensemble",
    "ErrorRow",
    "error_report",
    "full_report",
]


@dataclass
class AtomicMeasure:
    """Probability measure on the line with finitely many atoms."""

    locations: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.locations = np.atleast_1d(np.asarray(self.locations, dtype=float))
        self.weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if self.locations.shape != self.weights.shape or self.locations.ndim != 1:
            raise ValueError("locations and weights must be 1D arrays of equal length")
        if self.locations.size == 0:
            raise ValueError("measure needs at least one atom")
        if np.any(self.weights < 0):
            raise ValueError("weights must be non-negative")
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to one")

    @classmethod
    def dirac(cls, x):
        return cls(np.array([float(x)]), np.array([1.0]))

    @classmethod
    def uniform(cls, locations):
        locations = np.atleast_1d(np.asarray(locations, dtype=float))
        n = locations.size
        return cls(locations, np.full(n, 1.0 / n))

    def merged(self):
        """Combine atoms at identical locations and drop zero weights."""
        order = np.argsort(self.locations, kind="stable")
        locs = self.locations[order]
        ws = self.weights[order]
        out_l, out_w = [], []
        for l, w in zip(locs, ws):
            if out_l and l == out_l[-1]:
                out_w[-1] += w
            else:
                out_l.append(l)
                out_w.append(w)
        keep = [i for i, w in enumerate(out_w) if w > 0]
        return AtomicMeasure(np.array([out_l[i] for i in keep]), np.array([out_w[i] for i in keep]))


def wasserstein_1d(mu: AtomicMeasure, nu: AtomicMeasure, s: float = 1.0) -> float:
    """s-Wasserstein distance between atomic measures on the line.

    Merges the two quantile functions and integrates
    ``|quantile difference|^s`` over (0, 1), then takes the s-th root.
    """
    if s < 1:
        raise ValueError("Wasserstein order s must be >= 1")
    oi = np.argsort(mu.locations, kind="stable")
    oj = np.argsort(nu.locations, kind="stable")
    xs, ws = mu.locations[oi], mu.weights[oi]
    ys, vs = nu.locations[oj], nu.weights[oj]

    cost = 0.0
    i = j = 0
    rem_w = ws[0]
    rem_v = vs[0]
    while True:
        m = min(rem_w, rem_v)
        if m > 0:
            cost += m * abs(xs[i] - ys[j]) ** s
        rem_w -= m
        rem_v -= m
        if rem_w <= 0:
            i += 1
            if i >= xs.size:
                break
            rem_w = ws[i]
        if rem_v <= 0:
            j += 1
            if j >= ys.size:
                break
            rem_v = vs[j]
    return cost ** (1.0 / s)


def inject_to_fine(coarse, fine: StructuredMesh):
    """Piecewise-constant prolongation onto a dyadically nested finer mesh."""
    mesh = coarse.mesh
    ratios = mesh.refinement_ratio(fine)
    if ratios is None:
        raise ValueError("fine mesh is not a dyadic refinement of the coarse mesh")

    def blow(arr):
        out = arr
        for a, r in enumerate(ratios):
            out = np.repeat(out, r, axis=a)
        return out

    if isinstance(coarse, CellField):
        return CellField(fine, blow(coarse.values))
    if isinstance(coarse, CellVectorField):
        comps = np.stack([blow(coarse.values[c]) for c in range(mesh.dim)])
        return CellVectorField(fine, comps)
    raise TypeError("expected a CellField or CellVectorField")


def cesaro_average(fields, n: int = None) -> CellField:
    """Arithmetic mean of the first n member fields, per cell."""
    fields = list(fields)
    if n is None:
        n = len(fields)
    if n < 1 or n > len(fields):
        raise ValueError("need at least one member in the prefix")
    acc = np.zeros(fields[0].mesh.shape)
    for f in fields[:n]:
        acc += f.values
    return CellField(fields[0].mesh, acc / n)


def first_variance(fields, n: int = None) -> CellField:
    """Mean absolute deviation from the running Cesaro average.

    Returns the field (1/n) sum_{j<=n} |U_j - Ubar_j| with Ubar_j the
    Cesaro average of the first j members.
    """
    fields = list(fields)
    if n is None:
        n = len(fields)
    if n < 1 or n > len(fields):
        raise ValueError("need at least one member in the prefix")
    mesh = fields[0].mesh
    acc = np.zeros(mesh.shape)
    running = np.zeros(mesh.shape)
    for j, f in enumerate(fields[:n], start=1):
        running += f.values
        acc += np.abs(f.values - running / j)
    return CellField(mesh, acc / n)


def relative_entropy_field(
    rho: CellField, m: CellVectorField, r: CellField, U: CellVectorField, eos: Eos
) -> CellField:
    """Relative entropy density of (rho, m) with respect to (r, U).

    Per cell: rho |m/rho - U|^2 / 2 + psi(rho) - psi(r) - psi'(r)(rho - r);
    non-negative, zero exactly when rho = r and m = r U.
    """
    rv, mv = rho.values, m.values
    rr, Uv = r.values, U.values
    if np.any(rv <= 0) or np.any(rr <= 0):
        raise ValueError("relative entropy requires strictly positive densities")
    kin = 0.5 * rv * np.sum((mv / rv[None] - Uv) ** 2, axis=0)
    breg = (
        eos.pressure_potential(rv)
        - eos.pressure_potential(rr)
        - eos.dpressure_potential(rr) * (rv - rr)
    )
    return CellField(rho.mesh, kin + breg)


def lp_norm(field: CellField, p: int) -> float:
    """(sum_K |K| |q_K|^p)^(1/p) for p in {1, 2}."""
    if p not in (1, 2):
        raise ValueError("only p = 1 and p = 2 are supported")
    vol = field.mesh.cell_volume
    if p == 1:
        return vol * float(np.abs(field.values).sum())
    return float(np.sqrt(vol * np.sum(field.values**2)))


@dataclass
class Ensemble:
    """Refinement-level snapshots injected onto the reference mesh.

    ``members[i]`` maps variable name -> CellField on the reference mesh,
    ordered coarsest first; ``reference`` holds the reference snapshot.
    """

    ks: list
    members: list
    reference: dict
    eos: Eos = None

    def __post_init__(self):
        if len(self.ks) != len(self.members):
            raise ValueError("one resolution per member required")
        if len(self.members) < 1:
            raise ValueError("ensemble needs at least one member")
        if any(k2 <= k1 for k1, k2 in zip(self.ks, self.ks[1:])):
            raise ValueError("resolutions must be strictly increasing")
        ref_mesh = next(iter(self.reference.values())).mesh
        for mem in self.members:
            if set(mem) != set(self.reference):
                raise ValueError("members and reference must share variable names")
            for f in mem.values():
                if f.mesh.shape != ref_mesh.shape:
                    raise ValueError("ensemble fields must live on the reference mesh")

    @property
    def variables(self):
        order = ["rho", "m1", "m2", "m3"]
        return [v for v in order if v in self.reference] + sorted(
            v for v in self.reference if v not in order
        )

    @classmethod
    def from_states(cls, runs, reference_state, eos: Eos):
        """Build from [(k, State)] member runs plus the reference State.

        Fields are converted to (rho, m1..md) and injected onto the
        reference mesh.
        """
        ref_mesh = reference_state.mesh
        dim = ref_mesh.dim

        def fields_of(state):
            out = {"rho": state.rho}
            for c in range(dim):
                out[f"m{c + 1}"] = CellField(
                    state.mesh, state.rho.values * state.u.values[c]
                )
            return out

        members = []
        ks = []
        for k, st in runs:
            ks.append(int(k))
            members.append(
                {name: inject_to_fine(f, ref_mesh) for name, f in fields_of(st).items()}
            )
        reference = fields_of(reference_state)
        return cls(ks=ks, members=members, reference=reference, eos=eos)


@dataclass
class ErrorRow:
    variable: str
    k: int
    E1: float
    E2: float
    E3: float
    E4: float
    E5: float
    E6: float
    rel_entropy_L1: float = float("nan")


def _wasserstein_field_to_dirac(member_values, ref_values, s):
    """Per-cell W_s between the running-average atomic measure and the Dirac
    at the reference value; vectorized over cells."""
    stack = np.stack(member_values)  # (j, cells...)
    diffs = np.abs(stack - ref_values[None]) ** s
    return (diffs.mean(axis=0)) ** (1.0 / s)


def error_report(ensemble: Ensemble, variable: str, s: float = 1.0):
    """E1..E6 for one variable, one row per refinement level."""
    if variable not in ensemble.reference:
        raise ValueError(f"unknown variable {variable!r}")
    mesh = ensemble.reference[variable].mesh
    ref = ensemble.reference[variable].values
    vals = [m[variable].values for m in ensemble.members]
    n = len(vals)

    # reference-side statistics treat the reference as the final level
    seq = vals + [ref]
    running = np.zeros(mesh.shape)
    run_means = []
    for j, v in enumerate(seq, start=1):
        running += v
        run_means.append(running / j)
    ref_mean = run_means[-1]
    dev = np.zeros(mesh.shape)
    var_fields = []
    for j, v in enumerate(seq, start=1):
        dev += np.abs(v - run_means[j - 1])
        var_fields.append(dev / j)
    ref_var = var_fields[-1]

    rows = []
    for j in range(1, n + 1):
        uj = vals[j - 1]
        e1 = lp_norm(CellField(mesh, uj - ref), 1)
        e2 = lp_norm(CellField(mesh, run_means[j - 1] - ref_mean), 1)
        e5 = lp_norm(CellField(mesh, run_means[j - 1] - ref_mean), 2)
        e3 = lp_norm(CellField(mesh, var_fields[j - 1] - ref_var), 1)
        wfield = _wasserstein_field_to_dirac(vals[:j], ref, s)
        e4 = lp_norm(CellField(mesh, wfield), 1)
        e6 = lp_norm(CellField(mesh, wfield), 2)
        rows.append(ErrorRow(variable, ensemble.ks[j - 1], e1, e2, e3, e4, e5, e6))
    return rows


def full_report(ensemble: Ensemble, s: float = 1.0):
    """Rows for every variable plus the per-resolution relative-entropy norm.

    Relative entropy compares each member state (rho, m) against the
    reference (r, U); the same scalar is attached to every variable row of
    that resolution.
    """
    rel = {}
    ref_mesh = next(iter(ensemble.reference.values())).mesh
    state_vars = {"rho"} | {f"m{c + 1}" for c in range(ref_mesh.dim)}
    if ensemble.eos is not None and state_vars <= set(ensemble.reference):
        r_inj = ensemble.reference["rho"]
        U_inj = CellVectorField(
            ref_mesh,
            np.stack(
                [
                    ensemble.reference[f"m{c + 1}"].values / r_inj.values
                    for c in range(ref_mesh.dim)
                ]
            ),
        )
        for k, mem in zip(ensemble.ks, ensemble.members):
            rho = mem["rho"]
            m = CellVectorField(
                ref_mesh,
                np.stack([mem[f"m{c + 1}"].values for c in range(ref_mesh.dim)]),
            )
            e = relative_entropy_field(rho, m, r_inj, U_inj, ensemble.eos)
            rel[k] = lp_norm(e, 1)

    rows = []
    for var in ensemble.variables:
        for row in error_report(ensemble, var, s=s):
            row.rel_entropy_L1 = rel.get(row.k, float("nan"))
            rows.append(row)
    return rows
