"""Normalized gradient flow for ground and first excited states.

One flow step freezes the density from the current iterate, solves the
semi-implicit backward Euler system

    (1/tau - (1/2) Lap_h + V + beta |phi_n|^2) phi* = phi_n / tau

with the grid's boundary condition, and projects back to the unit sphere.
The implicit operator is symmetric positive definite for tau > 0, so the
linear solve is a direct banded elimination in 1D and Jacobi-preconditioned
conjugate gradients in 2D/3D.

Excited branches are selected by symmetry rather than deflation:

* OddInX1: the iterate is re-antisymmetrized about the x1 midline every
  step, which is exact for potentials symmetric in x1.
* OddDiagonal: same idea under the swap x1 <-> x2 on a square domain (the
  higher comparison branch in the degenerate case).
* Vortex: complex field seeded with a 2 pi phase winding around the domain
  center; the winding number is monitored every step.
* PlaneWaveX1: complex plane wave with one phase winding along x1, the
  first excited branch of the periodic zero-potential problem.
* Lowest2SCF: a 1D self-consistent second-eigenpair iteration for bounded
  potentials with no usable symmetry (the nonconvex demos).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from gpegap import asymptotics
from gpegap.domain import (
    BoundaryCondition,
    BoxDomain,
    Grid,
    HarmonicPlusCosine,
    HarmonicPotential,
    Potential,
    ZeroPotential,
    eval_potential,
    is_degenerate_gammas,
    is_degenerate_lengths,
    make_grid,
)
from gpegap.functional import EnergyBreakdown, density, eigen_residual, energy, normalize
from gpegap.linalg import pcg, solve_cyclic_tridiag, solve_tridiag


class SolverError(RuntimeError):
    pass


class SymmetryViolatedError(SolverError):
    """Antisymmetry drift exceeded tolerance: tau too large or the potential
    is not symmetric about the midline."""


class LinearSolveError(SolverError):
    pass


class ExcitedMode(Enum):
    NONE = "none"
    ODD_X1 = "odd-x1"
    ODD_DIAGONAL = "odd-diagonal"
    VORTEX = "vortex"
    PLANE_WAVE_X1 = "plane-wave"
    LOWEST2_SCF = "scf"


@dataclass(frozen=True)
class SolverConfig:
    """Gradient-flow parameters.

    ``tau=None`` uses the adaptive default 0.1/(1 + beta max|phi|^2) with a
    floor of ``tau_floor``. ``tau_growth > 1`` lets the step grow by that
    factor after every energy-decreasing step, capped at ``tau_max``
    (useful for long strong-interaction 2D runs; off by default).
    Convergence requires both max|phi_next - phi|/tau < eps_stop and
    eigen-residual < resid_tol.
    """

    tau: float | None = None
    tau_floor: float = 1e-4
    tau_growth: float = 1.0
    tau_max: float = 5e-3
    eps_stop: float = 1e-7
    resid_tol: float = 1e-6
    max_iter: int = 100_000
    lin_rtol: float = 1e-10
    cg_max_iter: int = 2000
    excited: ExcitedMode = ExcitedMode.NONE
    warm_start: np.ndarray | None = None
    symmetry_drift_tol: float = 1e-8
    perturb: float = 0.0
    seed: int = 0
    record_winding: bool = True

    def __post_init__(self):
        if self.tau is not None and self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.eps_stop <= 0:
            raise ValueError("eps_stop must be positive")


@dataclass
class SolveReport:
    """Converged (or abandoned) state with diagnostics."""

    phi: np.ndarray | None
    breakdown: EnergyBreakdown | None
    residual: float
    iterations: int
    energy_history: np.ndarray
    status: str  # "converged" | "not_converged" | "failed"
    wall_time: float
    beta: float
    mode: ExcitedMode
    message: str = ""
    extras: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.status == "converged"


@dataclass(frozen=True)
class ProblemSpec:
    """One discrete eigenproblem: domain/BC, potential, interaction and grid.

    Bounded problems give ``lengths``; whole-space harmonic problems give a
    harmonic-type potential with ``bc=TRUNCATED_WHOLE_SPACE`` and the
    truncation box is derived from the trap frequencies and beta.
    """

    bc: BoundaryCondition
    n: tuple[int, ...]
    beta: float
    lengths: tuple[float, ...] | None = None
    potential: Potential = ZeroPotential()
    degenerate: bool | None = None
    degeneracy_rtol: float = 1e-12

    def __post_init__(self):
        object.__setattr__(self, "n", tuple(int(m) for m in (self.n if not isinstance(self.n, int) else (self.n,))))
        if self.lengths is not None:
            object.__setattr__(self, "lengths", tuple(float(L) for L in self.lengths))
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if self.bc is BoundaryCondition.TRUNCATED_WHOLE_SPACE:
            if self.trap_gammas() is None:
                raise ValueError("whole-space problems need a harmonic-type potential")
        elif self.lengths is None:
            raise ValueError("bounded problems need explicit side lengths")

    @property
    def dim(self) -> int:
        if self.lengths is not None:
            return len(self.lengths)
        return len(self.trap_gammas())

    def trap_gammas(self) -> tuple[float, ...] | None:
        if isinstance(self.potential, HarmonicPotential):
            return self.potential.gammas
        if isinstance(self.potential, HarmonicPlusCosine):
            return (self.potential.gamma,)
        return None

    def is_degenerate(self) -> bool:
        if self.degenerate is not None:
            return self.degenerate
        gs = self.trap_gammas()
        if self.bc is BoundaryCondition.TRUNCATED_WHOLE_SPACE and gs is not None:
            return is_degenerate_gammas(gs, self.degeneracy_rtol)
        if self.lengths is not None:
            return is_degenerate_lengths(self.lengths, self.degeneracy_rtol)
        return False

    def domain(self) -> BoxDomain:
        if self.bc is BoundaryCondition.TRUNCATED_WHOLE_SPACE:
            halves = truncation_half_lengths(self.trap_gammas(), self.beta)
            return BoxDomain(
                lengths=tuple(2.0 * x for x in halves),
                origin=tuple(-x for x in halves),
            )
        return BoxDomain(lengths=self.lengths)

    def build(self) -> tuple[Grid, np.ndarray]:
        grid = make_grid(self.domain(), self.n, self.bc)
        return grid, eval_potential(self.potential, grid)


def truncation_half_lengths(gammas: Sequence[float], beta: float) -> tuple[float, ...]:
    """Half-lengths of the whole-space truncation box: per dimension
    max(8/sqrt(gamma_j), 1.5 sqrt(2 mu_g^TF)/gamma_j). The state decays like
    a Gaussian (weak) or has TF support radius sqrt(2 mu)/gamma (strong), so
    the 1.5x margin keeps truncation error below discretization error."""
    gs = tuple(sorted(float(g) for g in gammas))
    if beta > 0:
        mu_tf = asymptotics.harmonic_mu_tf(gs, beta)
        radius = math.sqrt(2.0 * mu_tf)
    else:
        radius = 0.0
    return tuple(max(8.0 / math.sqrt(g), 1.5 * radius / g) for g in gs)


# ---------------------------------------------------------------------------
# One implicit step
# ---------------------------------------------------------------------------


class _ImplicitSolver:
    """Solves (1/tau - Lap/2 + diag) x = b on one grid, reusing CG warm
    starts across calls."""

    def __init__(self, grid: Grid, cfg: SolverConfig):
        self.grid = grid
        self.cfg = cfg
        self.last_scale = 1.0
        self.cg_iters_total = 0

    def solve(self, phi: np.ndarray, diag_field: np.ndarray, tau: float) -> np.ndarray:
        grid = self.grid
        b = phi / tau
        if grid.dim == 1:
            return self._solve_1d(b, diag_field, tau)
        inv_tau = 1.0 / tau
        half = 0.5

        def apply_a(x):
            return inv_tau * x - half * grid.laplacian(x) + diag_field * x

        diag = inv_tau + sum(1.0 / h**2 for h in grid.h) + diag_field
        x0 = phi * self.last_scale  # previous step's solution scale
        r0 = b - apply_a(x0)
        r0norm = float(np.linalg.norm(r0.ravel()))
        bnorm = float(np.linalg.norm(b.ravel()))
        # inexact-solve forcing: always reduce the incoming residual so the
        # outer iteration keeps contracting near its fixed point
        stop = min(self.cfg.lin_rtol * bnorm, 0.5 * r0norm) if r0norm > 0 else 0.0
        stop = max(stop, 1e-15 * bnorm)
        x, iters, rnorm = pcg(
            apply_a, b, x0, 1.0 / diag, rtol=0.0, atol=stop, maxiter=self.cfg.cg_max_iter
        )
        self.cg_iters_total += iters
        if rnorm > stop * 1.001 and iters >= self.cfg.cg_max_iter:
            raise LinearSolveError(
                f"CG stalled: residual {rnorm:.3e} > target {stop:.3e} "
                f"after {iters} iterations"
            )
        denom = float(np.real(np.vdot(phi, phi)))
        self.last_scale = float(np.real(np.vdot(phi, x))) / denom
        return x

    def _solve_1d(self, b: np.ndarray, diag_field: np.ndarray, tau: float) -> np.ndarray:
        grid = self.grid
        h = grid.h[0]
        n = grid.n[0]
        off = -0.5 / h**2
        diag = 1.0 / tau + 1.0 / h**2 + diag_field
        if grid.bc is BoundaryCondition.PERIODIC:
            lower = np.full(n - 1, off)
            upper = np.full(n - 1, off)
            return solve_cyclic_tridiag(lower, diag, upper, off, off, b)
        lower = np.full(n - 1, off)
        upper = np.full(n - 1, off)
        if grid.bc is BoundaryCondition.NEUMANN:
            upper = upper.copy()
            lower = lower.copy()
            upper[0] = 2.0 * off  # ghost reflection doubles the edge coupling
            lower[-1] = 2.0 * off
        return solve_tridiag(lower, diag, upper, b)


def befd_step(phi: np.ndarray, V: np.ndarray, beta: float, tau: float, grid: Grid,
              lin_rtol: float = 1e-10) -> np.ndarray:
    """One backward Euler gradient-flow step followed by renormalization."""
    solver = _ImplicitSolver(grid, SolverConfig(lin_rtol=lin_rtol))
    star = solver.solve(phi, V + beta * density(phi), tau)
    return normalize(star, grid)


# ---------------------------------------------------------------------------
# Symmetry projections and diagnostics
# ---------------------------------------------------------------------------


def _project_odd_x1(phi: np.ndarray, grid: Grid) -> tuple[np.ndarray, float]:
    mirrored = grid.mirror(phi, axis=0)
    drift = float(np.max(np.abs(phi + mirrored))) / 2.0
    return 0.5 * (phi - mirrored), drift


def _project_odd_diagonal(phi: np.ndarray, grid: Grid) -> tuple[np.ndarray, float]:
    swapped = np.swapaxes(phi, 0, 1)
    drift = float(np.max(np.abs(phi + swapped))) / 2.0
    return 0.5 * (phi - swapped), drift


def vortex_center(grid: Grid) -> tuple[float, float]:
    """Half-cell point nearest the domain center in the x1-x2 plane, so no
    node sits exactly on the phase singularity."""
    out = []
    for ax in range(2):
        o = grid.domain.origin[ax]
        L = grid.domain.lengths[ax]
        h = grid.h[ax]
        k = round((o + L / 2.0 - grid.axes[ax][0]) / h - 0.5)
        out.append(float(grid.axes[ax][0] + (k + 0.5) * h))
    return tuple(out)


def winding_number(phi: np.ndarray, grid: Grid, center: tuple[float, float] | None = None,
                   ring: int = 2) -> int:
    """Phase circulation (in units of 2 pi) around a small node loop
    enclosing ``center`` in the x1-x2 plane."""
    if grid.dim < 2:
        raise ValueError("winding numbers need d >= 2")
    if center is None:
        center = vortex_center(grid)
    i0 = int(np.argmin(np.abs(grid.axes[0] - center[0])))
    j0 = int(np.argmin(np.abs(grid.axes[1] - center[1])))
    r = ring
    i0 = min(max(i0, r), grid.n[0] - 1 - r)
    j0 = min(max(j0, r), grid.n[1] - 1 - r)
    loop = []
    for j in range(j0 - r, j0 + r):
        loop.append((i0 + r, j))
    for i in range(i0 + r, i0 - r, -1):
        loop.append((i, j0 + r))
    for j in range(j0 + r, j0 - r, -1):
        loop.append((i0 - r, j))
    for i in range(i0 - r, i0 + r):
        loop.append((i, j0 - r))
    if grid.dim == 2:
        vals = np.array([phi[i, j] for i, j in loop])
    else:
        k_mid = grid.n[2] // 2
        vals = np.array([phi[i, j, k_mid] for i, j in loop])
    phases = np.angle(vals)
    dphi = np.diff(np.concatenate([phases, phases[:1]]))
    dphi = (dphi + math.pi) % (2.0 * math.pi) - math.pi
    return int(round(float(np.sum(dphi)) / (2.0 * math.pi)))


def winding_number_axis(phi: np.ndarray, grid: Grid, axis: int = 0) -> int:
    """Phase circulation along one periodic axis (plane-wave branches)."""
    idx = [m // 2 for m in grid.n]
    take = [slice(None) if ax == axis else idx[ax] for ax in range(grid.dim)]
    line = phi[tuple(take)]
    phases = np.angle(line)
    dphi = np.diff(np.concatenate([phases, phases[:1]]))
    dphi = (dphi + math.pi) % (2.0 * math.pi) - math.pi
    return int(round(float(np.sum(dphi)) / (2.0 * math.pi)))


# ---------------------------------------------------------------------------
# Initial guesses
# ---------------------------------------------------------------------------


def _initial_guess(spec: ProblemSpec, grid: Grid, mode: ExcitedMode) -> np.ndarray:
    gs = spec.trap_gammas()
    harmonic_like = spec.bc is BoundaryCondition.TRUNCATED_WHOLE_SPACE and gs is not None

    if mode is ExcitedMode.NONE:
        if grid.bc in (BoundaryCondition.PERIODIC, BoundaryCondition.NEUMANN):
            raw = np.ones(grid.shape)
        elif harmonic_like:
            raw, _ = asymptotics.profile("harmonic-linear-ground", grid, gammas=gs)
        else:
            raw, _ = asymptotics.profile("box-linear-ground", grid)
        return normalize(raw.astype(float), grid)

    if mode is ExcitedMode.ODD_X1:
        if harmonic_like:
            raw, _ = asymptotics.profile("harmonic-linear-excited", grid, gammas=gs)
        elif grid.bc is BoundaryCondition.NEUMANN:
            xi = grid.coords()[0] - grid.domain.origin[0]
            raw = np.cos(math.pi * xi / grid.domain.lengths[0]) * np.ones(grid.shape)
        else:
            raw, _ = asymptotics.profile("box-linear-excited", grid)
        return normalize(raw.astype(float), grid)

    if mode is ExcitedMode.ODD_DIAGONAL:
        if grid.dim != 2 or grid.n[0] != grid.n[1]:
            raise SolverError("the diagonal-odd branch needs a square 2D grid")
        if harmonic_like:
            g1, _ = asymptotics.profile("harmonic-linear-excited", grid, gammas=gs)
        else:
            g1, _ = asymptotics.profile("box-linear-excited", grid)
        raw = g1 - np.swapaxes(g1, 0, 1)
        return normalize(raw.astype(float), grid)

    if mode is ExcitedMode.VORTEX:
        if grid.dim < 2:
            raise SolverError("vortex branches need d >= 2")
        c = vortex_center(grid)
        coords = grid.coords()
        if harmonic_like:
            env, _ = asymptotics.profile("harmonic-linear-ground", grid, gammas=gs)
        else:
            env, _ = asymptotics.profile("box-linear-ground", grid)
        raw = ((coords[0] - c[0]) + 1j * (coords[1] - c[1])) * env
        return normalize(raw.astype(complex), grid)

    if mode is ExcitedMode.PLANE_WAVE_X1:
        if grid.bc is not BoundaryCondition.PERIODIC:
            raise SolverError("plane-wave branches need periodic boundary conditions")
        xi = grid.coords()[0] - grid.domain.origin[0]
        raw = np.exp(2j * math.pi * xi / grid.domain.lengths[0]) * np.ones(grid.shape, complex)
        return normalize(raw, grid)

    raise SolverError(f"no flow initial guess for mode {mode}")


# ---------------------------------------------------------------------------
# The flow driver
# ---------------------------------------------------------------------------


def _default_tau(beta: float, rho_max: float, cfg: SolverConfig, v_min: float = 0.0) -> float:
    tau = max(cfg.tau_floor, 0.1 / (1.0 + beta * rho_max))
    if v_min < 0.0:
        # keep 1/tau + lambda_min > 0 so the implicit solve stays a descent
        # filter (lambda_min >= V_min since the kinetic part is nonnegative)
        tau = min(tau, 0.5 / abs(v_min))
    return tau


def _run_flow(spec: ProblemSpec, cfg: SolverConfig, mode: ExcitedMode) -> SolveReport:
    t0 = time.perf_counter()
    grid, V = spec.build()
    beta = spec.beta

    if cfg.warm_start is not None:
        phi = normalize(np.array(cfg.warm_start), grid)
        if mode is ExcitedMode.VORTEX and not np.iscomplexobj(phi):
            raise SolverError("vortex warm starts must be complex")
    else:
        phi = _initial_guess(spec, grid, mode)
    if cfg.perturb > 0.0:
        rng = np.random.default_rng(cfg.seed)
        noise = rng.standard_normal(grid.shape)
        if np.iscomplexobj(phi):
            noise = noise + 1j * rng.standard_normal(grid.shape)
        phi = normalize(phi + cfg.perturb * noise, grid)

    if mode is ExcitedMode.ODD_X1:
        if not _potential_symmetric(V, grid, axis=0):
            raise SymmetryViolatedError(
                "potential is not symmetric about the x1 midline; "
                "the odd-in-x1 branch is not defined"
            )
        phi = normalize(_project_odd_x1(phi, grid)[0], grid)
    elif mode is ExcitedMode.ODD_DIAGONAL:
        if not np.allclose(V, np.swapaxes(V, 0, 1), atol=1e-12):
            raise SymmetryViolatedError("potential is not symmetric under x1 <-> x2")
        phi = normalize(_project_odd_diagonal(phi, grid)[0], grid)

    solver = _ImplicitSolver(grid, cfg)
    v_min = float(V.min())
    br = energy(phi, V, beta, grid)
    history = [br.total]
    windings: list[int] = []
    if cfg.record_winding and mode is ExcitedMode.VORTEX:
        windings.append(winding_number(phi, grid))

    tau_mult = 1.0
    status = "not_converged"
    residual = math.inf
    iterations = 0
    max_drift = 0.0

    for it in range(1, cfg.max_iter + 1):
        iterations = it
        rho = density(phi)
        if cfg.tau is not None:
            tau = cfg.tau
        else:
            base = _default_tau(beta, float(rho.max()), cfg, v_min)
            # tau_max caps the growth amplification, never the base formula
            tau = min(base * tau_mult, max(base, cfg.tau_max))

        star = solver.solve(phi, V + beta * rho, tau)
        phi_new = normalize(star, grid)

        if mode is ExcitedMode.ODD_X1:
            projected, drift = _project_odd_x1(phi_new, grid)
            max_drift = max(max_drift, drift)
            if drift > cfg.symmetry_drift_tol:
                raise SymmetryViolatedError(
                    f"antisymmetry drift {drift:.3e} exceeds "
                    f"{cfg.symmetry_drift_tol:.1e} at iteration {it}"
                )
            phi_new = normalize(projected, grid)
        elif mode is ExcitedMode.ODD_DIAGONAL:
            projected, drift = _project_odd_diagonal(phi_new, grid)
            max_drift = max(max_drift, drift)
            if drift > cfg.symmetry_drift_tol:
                raise SymmetryViolatedError(
                    f"diagonal antisymmetry drift {drift:.3e} exceeds "
                    f"{cfg.symmetry_drift_tol:.1e} at iteration {it}"
                )
            phi_new = normalize(projected, grid)

        step_diff = float(np.max(np.abs(phi_new - phi))) / tau
        phi = phi_new
        br = energy(phi, V, beta, grid)
        history.append(br.total)
        if cfg.record_winding and mode is ExcitedMode.VORTEX:
            windings.append(winding_number(phi, grid))

        if cfg.tau_growth > 1.0:
            if history[-1] <= history[-2] + 1e-14:
                tau_mult = min(tau_mult * cfg.tau_growth, cfg.tau_max / cfg.tau_floor)
            else:
                tau_mult = max(1.0, tau_mult / 4.0)

        if step_diff < cfg.eps_stop:
            residual = eigen_residual(phi, V, beta, grid)
            if residual < cfg.resid_tol:
                status = "converged"
                break

    if not math.isfinite(residual):
        residual = eigen_residual(phi, V, beta, grid)

    extras = {"max_symmetry_drift": max_drift, "cg_iterations": solver.cg_iters_total}
    if windings:
        extras["windings"] = windings
        extras["winding"] = windings[-1]
    if mode is ExcitedMode.PLANE_WAVE_X1:
        extras["winding"] = winding_number_axis(phi, grid, axis=0)

    return SolveReport(
        phi=phi,
        breakdown=br,
        residual=residual,
        iterations=iterations,
        energy_history=np.asarray(history),
        status=status,
        wall_time=time.perf_counter() - t0,
        beta=beta,
        mode=mode,
        message="" if status == "converged" else
        f"stopped after {iterations} iterations with residual {residual:.3e}",
        extras=extras,
    )


def _potential_symmetric(V: np.ndarray, grid: Grid, axis: int = 0) -> bool:
    return bool(np.allclose(V, grid.mirror(V, axis=axis), atol=1e-11, rtol=1e-11))


def solve_ground(spec: ProblemSpec, cfg: SolverConfig | None = None) -> SolveReport:
    """Gradient-flow minimizer of the energy on the unit sphere; the
    converged field is real and nonnegative up to solver precision."""
    cfg = cfg or SolverConfig()
    report = _run_flow(spec, replace(cfg, excited=ExcitedMode.NONE), ExcitedMode.NONE)
    if report.phi is not None and not np.iscomplexobj(report.phi):
        undershoot = float(report.phi.min())
        report.extras["min_value"] = undershoot
    return report


def solve_excited(spec: ProblemSpec, cfg: SolverConfig) -> SolveReport:
    """First excited branch selected by cfg.excited (see module docstring)."""
    if cfg.excited is ExcitedMode.NONE:
        raise ValueError("solve_excited needs an excited mode; use solve_ground otherwise")
    if cfg.excited is ExcitedMode.VORTEX:
        if spec.dim < 2:
            raise SolverError("vortex branches need d >= 2")
        if not spec.is_degenerate():
            raise SolverError(
                "the vortex branch is the first excited state only in the "
                "degenerate case (L1 = L2 or gamma_1 = gamma_2)"
            )
    if cfg.excited is ExcitedMode.LOWEST2_SCF:
        return solve_excited_scf(spec, cfg)
    return _run_flow(spec, cfg, cfg.excited)


def solve_excited_scf(spec: ProblemSpec, cfg: SolverConfig) -> SolveReport:
    """Self-consistent second eigenpair of the 1D mean-field Hamiltonian.

    Used for bounded 1D potentials with no midline symmetry, where the
    symmetric flow branches are not defined. Iterates the linear eigenproblem
    with the excited state's own density, with damped density mixing.
    """
    t0 = time.perf_counter()
    grid, V = spec.build()
    if grid.dim != 1:
        raise SolverError("the self-consistent excited solve is one dimensional")
    if grid.bc is not BoundaryCondition.DIRICHLET:
        raise SolverError("the self-consistent excited solve needs Dirichlet BC")
    h = grid.h[0]
    n = grid.n[0]
    beta = spec.beta
    off = np.full(n - 1, -0.5 / h**2)

    if cfg.warm_start is not None:
        rho = density(normalize(np.real(np.array(cfg.warm_start)), grid))
    else:
        rho = density(_initial_guess(spec, grid, ExcitedMode.ODD_X1))
    mixing = 0.3
    prev_change = math.inf
    phi = None
    history = []
    status = "not_converged"
    iterations = 0
    for it in range(1, 4000 + 1):
        iterations = it
        diag = 1.0 / h**2 + V + beta * rho
        _, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, 1))
        psi = vecs[:, 1] / math.sqrt(h)  # Euclidean to quadrature normalization
        if phi is not None and float(np.dot(phi, psi)) < 0:
            psi = -psi
        phi = psi
        history.append(energy(phi, V, beta, grid).total)
        rho_new = density(phi)
        change = float(np.max(np.abs(rho_new - rho)))
        if change < 1e-12 or (
            it % 25 == 0 and eigen_residual(phi, V, beta, grid) < cfg.resid_tol
        ):
            status = "converged"
            break
        # damp harder when the fixed-point residual grows, relax when it
        # contracts steadily; strong coupling (large beta) needs heavy damping
        if change > prev_change:
            mixing = max(0.005, 0.5 * mixing)
        elif change < 0.8 * prev_change:
            mixing = min(0.5, 1.1 * mixing)
        prev_change = change
        rho = rho + mixing * (rho_new - rho)

    residual = eigen_residual(phi, V, beta, grid)
    if residual >= cfg.resid_tol and residual < 1e-1:
        phi, residual = _newton_refine_1d(phi, V, beta, grid, cfg)
    br = energy(phi, V, beta, grid)
    status = "converged" if residual < cfg.resid_tol else "not_converged"
    return SolveReport(
        phi=phi,
        breakdown=br,
        residual=residual,
        iterations=iterations,
        energy_history=np.asarray(history),
        status=status,
        wall_time=time.perf_counter() - t0,
        beta=beta,
        mode=ExcitedMode.LOWEST2_SCF,
        message="" if status == "converged" else f"SCF stalled with residual {residual:.3e}",
        extras={},
    )


def _newton_refine_1d(phi, V, beta, grid: Grid, cfg: SolverConfig):
    """Newton polish of a near-stationary real 1D state: solves the bordered
    system for (delta phi, delta mu) with the normalization constraint, two
    tridiagonal solves per step. Returns the best (phi, residual) found."""
    h = grid.h[0]
    n = grid.n[0]
    w = h  # uniform Dirichlet quadrature weight
    off = np.full(n - 1, -0.5 / h**2)
    best_phi, best_res = phi, eigen_residual(phi, V, beta, grid)
    cur = phi.copy()
    for _ in range(12):
        rho = cur * cur
        br = energy(cur, V, beta, grid)
        mu = br.mu
        f1 = -0.5 * grid.laplacian(cur) + (V + beta * rho) * cur - mu * cur
        f2 = float(grid.integrate(rho)) - 1.0
        diag = 1.0 / h**2 + V + 3.0 * beta * rho - mu
        y1 = solve_tridiag(off, diag, off, f1)
        y2 = solve_tridiag(off, diag, off, cur)
        wphi = 2.0 * w * cur
        denom = float(np.dot(wphi, y2))
        if abs(denom) < 1e-300:
            break
        dmu = (-f2 + float(np.dot(wphi, y1))) / denom
        dphi = -y1 + dmu * y2
        cur = cur + dphi
        cur = normalize(cur, grid)
        res = eigen_residual(cur, V, beta, grid)
        if res < best_res:
            best_phi, best_res = cur.copy(), res
        if res < 0.1 * cfg.resid_tol:
            break
    return best_phi, best_res


# ---------------------------------------------------------------------------
# Continuation
# ---------------------------------------------------------------------------


def continue_in_beta(spec: ProblemSpec, betas: Sequence[float],
                     cfg: SolverConfig | None = None) -> list[SolveReport]:
    """Solve a sweep of interaction strengths, warm-starting each solve from
    the previous converged field (interpolated if the truncation box grew).
    Per-beta failures are recorded and the sweep continues."""
    cfg = cfg or SolverConfig()
    betas = [float(b) for b in betas]
    if betas != sorted(betas):
        raise ValueError("beta list must be sorted ascending")
    reports: list[SolveReport] = []
    warm: np.ndarray | None = cfg.warm_start
    warm_grid: Grid | None = None
    for b in betas:
        sp = replace(spec, beta=b)
        grid = make_grid(sp.domain(), sp.n, sp.bc)
        start = warm
        if warm is not None and warm_grid is not None and not _grids_match(warm_grid, grid):
            start = _regrid(warm, warm_grid, grid)
        c = replace(cfg, warm_start=start)
        try:
            if cfg.excited is ExcitedMode.NONE:
                rep = solve_ground(sp, c)
            else:
                rep = solve_excited(sp, c)
        except SolverError as exc:
            rep = SolveReport(
                phi=None, breakdown=None, residual=math.inf, iterations=0,
                energy_history=np.array([]), status="failed", wall_time=0.0,
                beta=b, mode=cfg.excited, message=str(exc),
            )
        reports.append(rep)
        if rep.converged:
            warm = rep.phi
            warm_grid = grid
    return reports


def _grids_match(a: Grid, b: Grid) -> bool:
    return (
        a.n == b.n
        and a.bc == b.bc
        and np.allclose(a.domain.lengths, b.domain.lengths)
        and np.allclose(a.domain.origin, b.domain.origin)
    )


def _regrid(phi: np.ndarray, src: Grid, dst: Grid) -> np.ndarray:
    """Linear interpolation of a field onto a new grid, zero outside."""
    if src.dim == 1:
        x_old = src.axes[0]
        x_new = dst.axes[0]
        if np.iscomplexobj(phi):
            re = np.interp(x_new, x_old, phi.real, left=0.0, right=0.0)
            im = np.interp(x_new, x_old, phi.imag, left=0.0, right=0.0)
            return re + 1j * im
        return np.interp(x_new, x_old, phi, left=0.0, right=0.0)
    from scipy.interpolate import RegularGridInterpolator

    pts = np.stack([c.ravel() for c in np.meshgrid(*dst.axes, indexing="ij")], axis=-1)

    def interp(part):
        f = RegularGridInterpolator(src.axes, part, bounds_error=False, fill_value=0.0)
        return f(pts).reshape(dst.shape)

    if np.iscomplexobj(phi):
        return interp(phi.real) + 1j * interp(phi.imag)
    return interp(phi)
