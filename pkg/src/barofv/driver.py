"""Run orchestration: single runs, multi-resolution studies, report rebuilds.

Every run directory is self-describing: a manifest with all parameters, the
per-step run log and the final snapshot (plus intermediates when a snapshot
cadence is requested).  Studies nest one run directory per member plus the
reference and emit the error-report CSV next to them.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .analysis import Ensemble, full_report
from .cases import CaseSpec
from .eos import Eos
from .rusanov import RusanovParams, run_rusanov
from .stab import StabParams, State, StepDiagnostics, discrete_energy, run_stabilized
from . import runio

__all__ = ["run_single", "run_study", "rebuild_report"]


def _rusanov_diag(state, eos, dt):
    mesh = state.mesh
    vol = mesh.cell_volume
    rho = state.rho.values
    u = state.u.values
    mom = [vol * float(np.sum(rho * u[c])) for c in range(mesh.dim)]
    mom += [0.0] * (3 - mesh.dim)
    _, energy = discrete_energy(state, eos)
    return StepDiagnostics(
        time=state.time,
        dt=dt,
        eta=0.0,
        newton_iters=0,
        newton_residual=0.0,
        mass=vol * float(np.sum(rho)),
        momentum=tuple(mom),
        energy=energy,
        min_rho=float(rho.min()),
        entropy_ok=True,
        dt_retries=0,
    )


def _check_boundary_quiet(case, initial, final):
    """Warn when the interior waves meet the periodic-seam waves.

    Two-state Riemann data on a periodic domain carries a second jump at
    the wrap seam; both wave systems are fine as long as an undisturbed
    plateau of the initial state survives between them on each side of the
    primary discontinuity.
    """
    rho0 = initial.rho.values
    rho1 = final.rho.values
    gap = float(rho0.max() - rho0.min())
    if gap <= 0:
        return
    # numerical-diffusion tails overlap long before the wave systems do;
    # only an O(gap) disturbance of a whole half counts as a collision
    disturbed = np.abs(rho1 - rho0) > 0.25 * gap
    centers = initial.mesh.axis_centers(0)
    for name, half in (("left", centers < 0.0), ("right", centers > 0.0)):
        if np.all(disturbed[half]):
            warnings.warn(
                f"case {case.name}: the {name}-half plateau between the interior "
                "and seam wave systems has vanished; boundary wraparound "
                "contaminates the solution",
                RuntimeWarning,
                stacklevel=2,
            )


def run_single(
    case: CaseSpec,
    scheme: str,
    k: int,
    out_dir,
    stab_params: StabParams = None,
    rus_params: RusanovParams = None,
    t_end: float = None,
    snapshots: int = 0,
):
    """Run one case at one resolution; returns the final State.

    Writes ``manifest.ini``, ``run_log.csv`` and ``snapshot_final.csv`` into
    ``out_dir`` (and ``snapshot_NNNNNN.csv`` every `snapshots` steps if > 0).
    """
    if scheme not in ("stab", "rusanov"):
        raise ValueError("scheme must be 'stab' or 'rusanov'")
    stab_params = stab_params or StabParams()
    rus_params = rus_params or RusanovParams()
    t_end = case.t_end if t_end is None else float(t_end)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    mesh = case.mesh(k)
    initial = case.initial_state(mesh)
    eos = case.eos

    manifest = {
        "case": case.name,
        "scheme": scheme,
        "k": int(k),
        "dim": case.dim,
        "lower": ",".join(repr(v) for v in case.lower),
        "upper": ",".join(repr(v) for v in case.upper),
        "eos_a": repr(eos.a),
        "eos_gamma": repr(eos.gamma),
        "t_end": repr(t_end),
        "snapshots": int(snapshots),
    }
    if scheme == "stab":
        manifest.update(
            eta_safety=repr(stab_params.eta_safety),
            cfl_safety=repr(stab_params.cfl_safety),
            newton_tol=repr(stab_params.newton_tol),
            newton_max_iter=stab_params.newton_max_iter,
            dt_retry_max=stab_params.dt_retry_max,
        )
    else:
        manifest["cfl"] = repr(rus_params.cfl)
    runio.write_manifest(out_dir / "manifest.ini", "run", manifest)

    diags = []

    def snap_cb(n, st):
        if snapshots > 0 and n % snapshots == 0:
            runio.write_snapshot(out_dir / f"snapshot_{n:06d}.csv", st, eos)

    if scheme == "stab":
        def on_step(n, st, diag):
            snap_cb(n, st)

        final, diags = run_stabilized(initial, eos, stab_params, t_end, on_step=on_step)
    else:
        last_t = [0.0]

        def watch(n, st):
            diags.append(_rusanov_diag(st, eos, st.time - last_t[0]))
            last_t[0] = st.time
            snap_cb(n, st)

        def restart():
            diags.clear()
            last_t[0] = 0.0

        final = run_rusanov(
            initial, eos, rus_params, t_end, on_step=watch, on_restart=restart
        )

    runio.write_run_log(out_dir / "run_log.csv", diags)
    runio.write_snapshot(out_dir / "snapshot_final.csv", final, eos)
    if case.warn_boundary:
        _check_boundary_quiet(case, initial, final)
    return final


def run_study(
    case: CaseSpec,
    ks,
    ref_k: int,
    out_dir,
    stab_params: StabParams = None,
    rus_params: RusanovParams = None,
    t_end: float = None,
    scheme: str = "stab",
    threads: int = 1,
):
    """Run the scheme at each resolution plus the Rusanov reference, then
    emit the E1..E6 / relative-entropy report on the reference grid."""
    ks = [int(k) for k in ks]
    if any(k2 <= k1 for k1, k2 in zip(ks, ks[1:])):
        raise ValueError("study resolutions must be strictly increasing")
    for k1, k2 in zip(ks, ks[1:]):
        if k2 % k1 != 0 or (k2 // k1) & (k2 // k1 - 1):
            raise ValueError("study resolutions must form a dyadic ladder")
    if ref_k < ks[-1]:
        raise ValueError("reference resolution must be at least the finest member")

    stab_params = stab_params or StabParams()
    rus_params = rus_params or RusanovParams()
    t_end = case.t_end if t_end is None else float(t_end)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    manifest = {
        "case": case.name,
        "scheme": scheme,
        "ks": ",".join(str(k) for k in ks),
        "ref_k": int(ref_k),
        "eos_a": repr(case.eos.a),
        "eos_gamma": repr(case.eos.gamma),
        "t_end": repr(t_end),
        "eta_safety": repr(stab_params.eta_safety),
        "cfl_safety": repr(stab_params.cfl_safety),
        "newton_tol": repr(stab_params.newton_tol),
        "newton_max_iter": stab_params.newton_max_iter,
        "dt_retry_max": stab_params.dt_retry_max,
        "cfl": repr(rus_params.cfl),
        "threads": int(threads),
    }
    runio.write_manifest(out_dir / "manifest.ini", "study", manifest)

    def member(k):
        return run_single(
            case, scheme, k, out_dir / f"member_k{k}",
            stab_params=stab_params, rus_params=rus_params, t_end=t_end,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            finals = list(pool.map(member, ks))
    else:
        finals = [member(k) for k in ks]

    reference = run_single(
        case, "rusanov", ref_k, out_dir / f"reference_k{ref_k}",
        rus_params=rus_params, t_end=t_end,
    )

    ensemble = Ensemble.from_states(list(zip(ks, finals)), reference, case.eos)
    rows = full_report(ensemble)
    runio.write_error_report(out_dir / "error_report.csv", rows)
    return rows


def rebuild_report(study_dir):
    """Re-derive the error report from the snapshots stored in a study dir."""
    study_dir = Path(study_dir)
    section, manifest = runio.read_manifest(study_dir / "manifest.ini")
    if section != "study":
        raise ValueError(f"{study_dir} does not contain a study manifest")
    ks = [int(k) for k in manifest["ks"].split(",")]
    ref_k = int(manifest["ref_k"])
    eos = Eos(float(manifest["eos_a"]), float(manifest["eos_gamma"]))

    runs = []
    for k in ks:
        _, st = runio.read_snapshot(study_dir / f"member_k{k}" / "snapshot_final.csv")
        runs.append((k, st))
    _, ref = runio.read_snapshot(study_dir / f"reference_k{ref_k}" / "snapshot_final.csv")

    ensemble = Ensemble.from_states(runs, ref, eos)
    rows = full_report(ensemble)
    runio.write_error_report(study_dir / "error_report.csv", rows)
    return rows
