"""Discrete energy functional, chemical potential, normalization and
eigen-residual.

All integrals use the grid quadrature weights, and the kinetic term is
computed as <phi, -(1/2) Lap_h phi> with the same discrete Laplacian the
solver uses, so the identity

    mu = E + (beta/2) * integral |phi|^4

holds exactly at the discrete level and the eigen-residual vanishes for
discrete stationary states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gpegap.domain import Grid

NORM_TOL = 1e-13


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy components of a normalized state.

    ``interaction`` is the raw quartic integral, integral |phi|^4; the
    interaction energy contribution is (beta/2) * interaction.
    """

    kinetic: float
    potential: float
    interaction: float
    beta: float

    @property
    def total(self) -> float:
        return self.kinetic + self.potential + 0.5 * self.beta * self.interaction

    @property
    def mu(self) -> float:
        return self.total + 0.5 * self.beta * self.interaction


def normalize(phi: np.ndarray, grid: Grid) -> np.ndarray:
    """Scale a field to unit discrete L2 norm; direction is unchanged."""
    nrm = grid.norm(phi)
    if nrm <= 0.0 or not np.isfinite(nrm):
        raise ValueError("cannot normalize a zero or non-finite field")
    return phi / nrm


def density(phi: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(phi):
        return phi.real**2 + phi.imag**2
    return phi * phi


def energy(phi: np.ndarray, V: np.ndarray, beta: float, grid: Grid) -> EnergyBreakdown:
    """Energy breakdown E = integral [ |grad phi|^2/2 + V |phi|^2 + beta |phi|^4/2 ].

    ``phi`` is expected normalized; ``beta`` must be nonnegative.
    """
    if beta < 0:
        raise ValueError("interaction strength beta must be nonnegative")
    if not np.all(np.isfinite(phi)):
        raise ValueError("field contains NaN/Inf")
    if not np.all(np.isfinite(V)):
        raise ValueError("potential contains NaN/Inf")
    rho = density(phi)
    kin = grid.integrate(np.conj(phi) * (-0.5 * grid.laplacian(phi)))
    kin = float(np.real(kin))
    pot = float(np.real(grid.integrate(V * rho)))
    quart = float(np.real(grid.integrate(rho * rho)))
    return EnergyBreakdown(kinetic=kin, potential=pot, interaction=quart, beta=float(beta))


def apply_hamiltonian(phi: np.ndarray, V: np.ndarray, beta: float, grid: Grid) -> np.ndarray:
    """Nodewise (-(1/2) Lap_h + V + beta |phi|^2) phi (un-normalized output)."""
    if not np.all(np.isfinite(phi)):
        raise ValueError("field contains NaN/Inf")
    return -0.5 * grid.laplacian(phi) + (V + beta * density(phi)) * phi


def eigen_residual(phi: np.ndarray, V: np.ndarray, beta: float, grid: Grid) -> float:
    """Discrete L2 norm of H[phi]phi - mu*phi with mu from the energy identity.

    Convergence diagnostic: vanishes (to solver precision) exactly when phi
    is a discrete stationary state.
    """
    br = energy(phi, V, beta, grid)
    r = apply_hamiltonian(phi, V, beta, grid) - br.mu * phi
    return grid.norm(r)
