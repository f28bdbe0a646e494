"""Explicit first-order Rusanov (local Lax-Friedrichs) reference solver.

Dimension-by-dimension face fluxes on the same periodic structured mesh;
used to compute the fine-grid reference solutions that the error metrics
compare against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eos import Eos
from .mesh import CellVectorField, CellField
from .ops import _neighbor
from .stab import NegativeDensity, State

__all__ = ["RusanovParams", "rusanov_flux", "rusanov_step", "run_rusanov"]


@dataclass(frozen=True)
class RusanovParams:
    cfl: float = 0.45

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError("cfl must lie in (0, 1]")


def rusanov_flux(left, right, normal, eos: Eos):
    """Rusanov flux between two conserved states (rho, m) through a face.

    ``left``/``right`` are ``(rho, m)`` pairs with m a length-d vector,
    ``normal`` the unit normal pointing from left to right.  Returns the
    conserved flux ``(mass_flux, momentum_flux)``.
    """
    rho_l, m_l = float(left[0]), np.asarray(left[1], dtype=float)
    rho_r, m_r = float(right[0]), np.asarray(right[1], dtype=float)
    if rho_l <= 0 or rho_r <= 0:
        raise NegativeDensity("Rusanov flux needs positive densities")
    nu = np.asarray(normal, dtype=float)

    u_l, u_r = m_l / rho_l, m_r / rho_r
    un_l, un_r = float(u_l @ nu), float(u_r @ nu)
    p_l, p_r = eos.pressure(rho_l), eos.pressure(rho_r)
    lam = max(abs(un_l) + eos.sound_speed(rho_l), abs(un_r) + eos.sound_speed(rho_r))

    f_mass = 0.5 * (rho_l * un_l + rho_r * un_r) - 0.5 * lam * (rho_r - rho_l)
    f_mom = 0.5 * (m_l * un_l + p_l * nu + m_r * un_r + p_r * nu) - 0.5 * lam * (m_r - m_l)
    return f_mass, f_mom


def _max_wave_speed(mesh, rho, u, eos):
    c = eos.sound_speed(rho)
    lam = 0.0
    for a in range(mesh.dim):
        lam = max(lam, float((np.abs(u[a]) + c).max()))
    return lam


def rusanov_step(state: State, params: RusanovParams, eos: Eos, t_end: float) -> State:
    """One explicit step with dt = cfl * (min spacing) / (max face wave speed)."""
    mesh = state.mesh
    rho = state.rho.values
    u = state.u.values
    if np.any(rho <= 0):
        raise NegativeDensity("state has non-positive density")

    lam_max = _max_wave_speed(mesh, rho, u, eos)
    if lam_max <= 0:
        dt = t_end - state.time
    else:
        dt = params.cfl * min(mesh.spacing) / lam_max
        dt = min(dt, t_end - state.time)
    if dt <= 0:
        raise ValueError("state.time must lie before t_end")

    m = rho[None] * u
    p = eos.pressure(rho)
    c = eos.sound_speed(rho)

    new_rho = rho.copy()
    new_m = m.copy()
    vol = mesh.cell_volume
    for a in range(mesh.dim):
        area = mesh.face_area(a)
        rho_r = _neighbor(rho, a)
        m_r = np.stack([_neighbor(m[k], a) for k in range(mesh.dim)])
        un_l = u[a]
        un_r = _neighbor(u[a], a)
        lam = np.maximum(np.abs(un_l) + c, np.abs(un_r) + _neighbor(c, a))

        f_mass = 0.5 * (rho * un_l + rho_r * un_r) - 0.5 * lam * (rho_r - rho)
        f_mom = 0.5 * (m * un_l[None] + m_r * un_r[None]) - 0.5 * lam[None] * (m_r - m)
        f_mom[a] += 0.5 * (p + _neighbor(p, a))

        coef = dt * area / vol
        new_rho -= coef * (f_mass - _neighbor(f_mass, a, -1))
        for k in range(mesh.dim):
            new_m[k] -= coef * (f_mom[k] - _neighbor(f_mom[k], a, -1))

    if np.any(new_rho <= 0):
        raise NegativeDensity("explicit update produced non-positive density")
    new_u = new_m / new_rho[None]
    return State(CellField(mesh, new_rho), CellVectorField(mesh, new_u), state.time + dt)


def run_rusanov(
    state: State,
    eos: Eos,
    params: RusanovParams,
    t_end: float,
    on_step=None,
    on_restart=None,
    max_cfl_retries: int = 6,
    max_steps: int = 10**7,
):
    """March the Rusanov scheme to t_end.

    On a NegativeDensity failure the whole run restarts from the initial
    state with the cfl halved, up to ``max_cfl_retries`` times;
    ``on_restart()`` lets the caller discard per-step state it accumulated
    during the failed attempt.
    """
    initial = state.copy()
    cfl = params.cfl
    for attempt in range(max_cfl_retries + 1):
        if attempt and on_restart is not None:
            on_restart()
        st = initial.copy()
        pr = RusanovParams(cfl)
        n = 0
        eps = 1e-12 * max(1.0, abs(t_end))
        try:
            while st.time < t_end - eps:
                if n >= max_steps:
                    raise RuntimeError("exceeded maximum step count")
                st = rusanov_step(st, pr, eos, t_end)
                n += 1
                if on_step is not None:
                    on_step(n, st)
            return st
        except NegativeDensity:
            cfl *= 0.5
    raise NegativeDensity(
        f"Rusanov run failed even at cfl {cfl}; initial data may be invalid"
    )
