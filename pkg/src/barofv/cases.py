"""The three benchmark problems: cylindrical explosion, Kelvin-Helmholtz
instability, and the 1D Riemann problem whose vanishing-pressure limit
forms a delta-shock.  Each case packages domain, pressure law, initial
state and final time exactly as used by the experiments."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .eos import Eos
from .mesh import StructuredMesh, project_initial
from .stab import State

__all__ = [
    "CaseSpec",
    "cylindrical_explosion",
    "kelvin_helmholtz",
    "delta_shock",
    "CASE_NAMES",
    "get_case",
]


@dataclass(frozen=True)
class CaseSpec:
    name: str
    dim: int
    lower: tuple
    upper: tuple
    eos: Eos
    t_end: float
    ref_k: int
    rho0: callable
    u0: callable
    warn_boundary: bool = False

    def mesh(self, k: int) -> StructuredMesh:
        return StructuredMesh((int(k),) * self.dim, self.lower, self.upper)

    def initial_state(self, mesh: StructuredMesh) -> State:
        rho = project_initial(self.rho0, mesh)
        u = project_initial(self.u0, mesh)
        if np.any(rho.values <= 0):
            raise ValueError("projected initial density must stay positive")
        return State(rho, u, 0.0)

    def with_eos(self, eos: Eos) -> "CaseSpec":
        return dataclasses.replace(self, eos=eos)


def cylindrical_explosion() -> CaseSpec:
    """2D explosion: dense disk, inward velocity ramp, p = rho^1.4, T = 0.25."""

    def rho0(x):
        r2 = x[0] ** 2 + x[1] ** 2
        return np.where(r2 <= 0.25, 2.0, 1.0)

    def u0(x):
        r2 = x[0] ** 2 + x[1] ** 2
        r = np.sqrt(r2)
        alpha = np.maximum(0.0, 1.0 - r) * (1.0 - np.exp(-16.0 * r2))
        mask = r > 1e-15
        rsafe = np.where(mask, r, 1.0)
        coef = np.where(mask, -alpha / rho0(x) / rsafe, 0.0)
        return np.stack([coef * x[0], coef * x[1]])

    return CaseSpec(
        name="cylindrical-explosion",
        dim=2,
        lower=(-1.0, -1.0),
        upper=(1.0, 1.0),
        eos=Eos(1.0, 1.4),
        t_end=0.25,
        ref_k=2048,
        rho0=rho0,
        u0=u0,
    )


def kelvin_helmholtz() -> CaseSpec:
    """Shear layer with seeded sine perturbation, p = rho^(5/3), T = 0.4."""
    amp = 0.025
    lam = 1.0 / 6.0

    def rho0(x):
        return np.where(np.abs(x[1]) < 0.25, 2.0, 1.0)

    def u0(x):
        u1 = np.where(np.abs(x[1]) < 0.25, -0.5, 0.5)
        phase = 2.0 * np.pi * (x[0] + 0.5) / lam
        u2 = np.where(
            np.abs(x[1] - 0.25) < 0.025,
            amp * np.sin(-phase),
            np.where(np.abs(x[1] + 0.25) < 0.025, amp * np.sin(phase), 0.0),
        )
        return np.stack([u1, u2])

    return CaseSpec(
        name="kelvin-helmholtz",
        dim=2,
        lower=(-0.5, -0.5),
        upper=(0.5, 0.5),
        eos=Eos(1.0, 5.0 / 3.0),
        t_end=0.4,
        ref_k=1024,
        rho0=rho0,
        u0=u0,
    )


def delta_shock(kappa: float) -> CaseSpec:
    """1D Riemann problem (1, 1.5)/(0.2, 0) with p = kappa^2 rho^1.4, T = 0.2.

    kappa -> 0 drives toward the pressureless sticky-particle regime whose
    Riemann solutions concentrate into delta-shocks.
    """
    kappa = float(kappa)
    if kappa <= 0:
        raise ValueError("kappa must be positive")

    def rho0(x):
        return np.where(x[0] < 0, 1.0, 0.2)

    def u0(x):
        return np.where(x[0] < 0, 1.5, 0.0)[None]

    return CaseSpec(
        name="delta-shock",
        dim=1,
        lower=(-1.0,),
        upper=(1.0,),
        eos=Eos(kappa**2, 1.4),
        t_end=0.2,
        ref_k=2048,
        rho0=rho0,
        u0=u0,
        warn_boundary=True,
    )


CASE_NAMES = ("cylindrical-explosion", "kelvin-helmholtz", "delta-shock")


def get_case(name: str, kappa: float = 1.0) -> CaseSpec:
    if name == "cylindrical-explosion":
        return cylindrical_explosion()
    if name == "kelvin-helmholtz":
        return kelvin_helmholtz()
    if name == "delta-shock":
        return delta_shock(kappa)
    raise ValueError(f"unknown case {name!r}; choose from {', '.join(CASE_NAMES)}")
