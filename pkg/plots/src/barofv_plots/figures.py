"""Figure builders: pseudocolor maps, log-log error curves, 1D profiles and
the relative-entropy table.  Each writer overwrites its output path."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvio import ERROR_COLUMNS, read_error_report, read_snapshot

__all__ = ["pseudocolor", "error_curves", "line_profile", "rel_entropy_table"]


def _field_or_die(snap, var):
    if var not in snap.fields:
        raise ValueError(
            f"snapshot has no column {var!r}; available: {', '.join(sorted(snap.fields))}"
        )
    return snap.fields[var]


def pseudocolor(snapshot_csv, var, out_path):
    """Filled-color plot of one variable of a 2D snapshot, axis-equal."""
    snap = read_snapshot(snapshot_csv)
    if snap.dim != 2:
        raise ValueError(
            f"pseudocolor needs a 2D snapshot (got {snap.dim}D); use the line-profile plot"
        )
    data = _field_or_die(snap, var)
    x, y = snap.coords
    fig, ax = plt.subplots(figsize=(6.4, 5.4))
    vmin, vmax = float(data.min()), float(data.max())
    if vmin == vmax:  # constant field: widen the range so the colorbar stays valid
        vmin, vmax = vmin - 0.5, vmax + 0.5
    im = ax.pcolormesh(x, y, data.T, shading="nearest", cmap="viridis", vmin=vmin, vmax=vmax)
    ax.set_aspect("equal")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_title(var)
    fig.colorbar(im, ax=ax)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out_path


def line_profile(snapshot_csv, var, out_path):
    """1D profile of one variable against the cell-center coordinate."""
    snap = read_snapshot(snapshot_csv)
    if snap.dim != 1:
        raise ValueError(f"line-profile needs a 1D snapshot (got {snap.dim}D)")
    data = _field_or_die(snap, var)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(snap.coords[0], data, lw=1.2)
    ax.set_xlabel("x")
    ax.set_ylabel(var)
    ax.grid(alpha=0.3)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out_path


def fit_loglog_slope(ks, errs):
    """Least-squares slope of log(err) against log(k)."""
    ks = np.asarray(ks, dtype=float)
    errs = np.asarray(errs, dtype=float)
    mask = errs > 0
    if mask.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(ks[mask]), np.log(errs[mask]), 1)[0])


def error_curves(report_csv, var, out_path):
    """Log-log plot of E1..E6 against k for one variable.

    Returns the output path and the fitted log-log slope per curve.
    """
    rows = [r for r in read_error_report(report_csv) if r["variable"] == var]
    if not rows:
        raise ValueError(f"report has no rows for variable {var!r}")
    rows.sort(key=lambda r: r["k"])
    if len(rows) < 2:
        raise ValueError("need at least two resolutions to plot error curves")
    missing = [c for c in ERROR_COLUMNS if c not in rows[0]]
    if missing:
        raise ValueError(f"report is missing error columns: {', '.join(missing)}")

    ks = [r["k"] for r in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.6))
    slopes = {}
    markers = ["o", "s", "^", "v", "D", "x"]
    for c, marker in zip(ERROR_COLUMNS, markers):
        errs = [r[c] for r in rows]
        slopes[c] = fit_loglog_slope(ks, errs)
        ax.loglog(ks, errs, marker=marker, ms=4, lw=1.2, label=c)
    ax.set_xlabel("k")
    ax.set_ylabel("error")
    ax.set_title(var)
    ax.grid(which="both", alpha=0.3)
    ax.legend(ncol=2, fontsize=9)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out_path, slopes


def rel_entropy_table(report_csv):
    """Relative-entropy values laid out as a two-row table; returns the text."""
    rows = read_error_report(report_csv)
    by_k = {}
    for r in rows:
        if "rel_entropy_L1" in r and np.isfinite(r["rel_entropy_L1"]):
            by_k[r["k"]] = r["rel_entropy_L1"]
    if not by_k:
        raise ValueError("report carries no relative-entropy column")
    ks = sorted(by_k)
    header = "k                | " + " | ".join(f"{k:>8d}" for k in ks)
    values = "Relative Entropy | " + " | ".join(f"{by_k[k]:8.4f}" for k in ks)
    return header + "\n" + values
