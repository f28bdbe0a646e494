"""Barotropic (isentropic) equation of state p = a * rho**gamma."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Eos"]


@dataclass(frozen=True)
class Eos:
    """Pressure-law parameters: coefficient a > 0, adiabatic exponent gamma > 1."""

    a: float
    gamma: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("pressure coefficient a must be positive")
        if not self.gamma > 1:
            raise ValueError("adiabatic exponent gamma must exceed 1")

    def pressure(self, rho):
        """p(rho) = a * rho**gamma, defined for rho >= 0."""
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < 0):
            raise ValueError("density must be non-negative")
        return self.a * rho**self.gamma

    def dpressure(self, rho):
        """p'(rho) = a * gamma * rho**(gamma-1)."""
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < 0):
            raise ValueError("density must be non-negative")
        return self.a * self.gamma * rho ** (self.gamma - 1.0)

    def pressure_potential(self, rho):
        """Internal energy per volume psi(rho) = a/(gamma-1) * rho**gamma.

        Satisfies z*psi'(z) - psi(z) = p(z).
        """
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < 0):
            raise ValueError("density must be non-negative")
        return self.a / (self.gamma - 1.0) * rho**self.gamma

    def dpressure_potential(self, rho):
        """psi'(rho) = a*gamma/(gamma-1) * rho**(gamma-1)."""
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < 0):
            raise ValueError("density must be non-negative")
        return self.a * self.gamma / (self.gamma - 1.0) * rho ** (self.gamma - 1.0)

    def d2pressure_potential(self, rho):
        """psi''(rho) = a*gamma * rho**(gamma-2); constant 2a for gamma = 2."""
        rho = np.asarray(rho, dtype=float)
        return self.a * self.gamma * rho ** (self.gamma - 2.0)

    def sound_speed(self, rho):
        """c(rho) = sqrt(p'(rho)); requires rho > 0."""
        rho = np.asarray(rho, dtype=float)
        if np.any(rho <= 0):
            raise ValueError("sound speed needs strictly positive density")
        return np.sqrt(self.dpressure(rho))
