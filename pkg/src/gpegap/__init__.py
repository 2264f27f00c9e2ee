"""Ground and first excited states of the Gross-Pitaevskii equation with
repulsive interaction, and the fundamental gaps in energy and chemical
potential as functions of the interaction strength.

The package has three layers:

* numerics: tensor grids with Dirichlet/Neumann/periodic boundary
  conditions, the discrete energy functional, and a normalized gradient
  flow solver (semi-implicit backward Euler finite differences),
* closed forms: weak/strong interaction expansions, Thomas-Fermi and
  matched profiles, and the conjectured gap lower bounds,
* reporting: gap curves, numeric-vs-closed-form comparisons, and a CLI
  that emits CSV/JSON and plot-ready data series.
"""

from gpegap.domain import (
    BoundaryCondition,
    BoxDomain,
    Grid,
    diameter,
    eval_potential,
    make_grid,
)
from gpegap.functional import (
    EnergyBreakdown,
    apply_hamiltonian,
    eigen_residual,
    energy,
    normalize,
)
from gpegap.solver import (
    ExcitedMode,
    ProblemSpec,
    SolveReport,
    SolverConfig,
    continue_in_beta,
    solve_excited,
    solve_ground,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryCondition",
    "BoxDomain",
    "Grid",
    "diameter",
    "eval_potential",
    "make_grid",
    "EnergyBreakdown",
    "apply_hamiltonian",
    "eigen_residual",
    "energy",
    "normalize",
    "ExcitedMode",
    "ProblemSpec",
    "SolveReport",
    "SolverConfig",
    "continue_in_beta",
    "solve_excited",
    "solve_ground",
]
