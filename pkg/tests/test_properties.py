"""Property suite: structural invariants of the flow, independent of any
closed-form numbers."""

import math

import numpy as np
import pytest

from gpegap.domain import BoundaryCondition, BoxDomain, HarmonicPotential, make_grid
from gpegap.functional import normalize
from gpegap.solver import (
    ExcitedMode,
    ProblemSpec,
    SolverConfig,
    befd_step,
    solve_excited,
    solve_ground,
)

D = BoundaryCondition.DIRICHLET
W = BoundaryCondition.TRUNCATED_WHOLE_SPACE
PI = math.pi


def test_unit_norm_after_every_step():
    g = make_grid(BoxDomain((2.0,)), 128, D)
    rng = np.random.default_rng(0)
    phi = normalize(rng.random(128) + 0.1, g)
    V = np.zeros(128)
    for _ in range(50):
        phi = befd_step(phi, V, 5.0, 2e-3, g)
        assert abs(g.norm(phi) - 1.0) <= 1e-12


@pytest.mark.parametrize("spec", [
    ProblemSpec(bc=D, n=(256,), beta=10.0, lengths=(2.0,)),
    ProblemSpec(bc=W, n=(256,), beta=10.0, potential=HarmonicPotential((1.0,))),
])
def test_energy_history_non_increasing_at_default_tau(spec):
    rep = solve_ground(spec, SolverConfig())
    assert rep.converged
    diffs = np.diff(rep.energy_history)
    assert np.max(diffs) <= 1e-12


def test_mu_identity_on_converged_state():
    spec = ProblemSpec(bc=D, n=(256,), beta=7.0, lengths=(2.0,))
    rep = solve_ground(spec)
    br = rep.breakdown
    assert br.mu - br.total == pytest.approx(0.5 * 7.0 * br.interaction, rel=1e-15)


def test_antisymmetry_preserved():
    spec = ProblemSpec(bc=D, n=(256,), beta=20.0, lengths=(2.0,))
    rep = solve_excited(spec, SolverConfig(excited=ExcitedMode.ODD_X1))
    assert rep.converged
    assert rep.extras["max_symmetry_drift"] <= 1e-10
    g = make_grid(BoxDomain((2.0,)), 256, D)
    assert np.max(np.abs(rep.phi + g.mirror(rep.phi))) <= 1e-10


def test_antisymmetrization_is_flow_fixed_point():
    # after one unprojected step from the converged odd state, re-projecting
    # changes the field by < 1e-10 when the potential is symmetric
    spec = ProblemSpec(bc=D, n=(128,), beta=5.0, lengths=(2.0,))
    rep = solve_excited(spec, SolverConfig(excited=ExcitedMode.ODD_X1))
    g = make_grid(BoxDomain((2.0,)), 128, D)
    stepped = befd_step(rep.phi, np.zeros(128), 5.0, 1e-3, g)
    projected = normalize(0.5 * (stepped - g.mirror(stepped)), g)
    assert np.max(np.abs(projected - stepped)) < 1e-10


def test_winding_constant_along_vortex_iterates():
    spec = ProblemSpec(bc=D, n=(32, 32), beta=5.0, lengths=(1.0, 1.0))
    rep = solve_excited(spec, SolverConfig(excited=ExcitedMode.VORTEX))
    assert rep.converged
    assert set(rep.extras["windings"]) == {1}


def test_grid_refinement_ratio_linear_limit():
    # beta = 0 energies converge at O(h^2): halving h cuts the error ~4x
    errs = []
    for n in (127, 255):
        spec = ProblemSpec(bc=D, n=(n,), beta=0.0, lengths=(2.0,))
        rep = solve_ground(spec)
        errs.append(abs(rep.breakdown.total - PI**2 / 8))
    ratio = errs[0] / errs[1]
    assert 3.4 < ratio < 4.6


def test_converged_ground_is_real_nonnegative():
    spec = ProblemSpec(bc=D, n=(128,), beta=30.0, lengths=(2.0,))
    rep = solve_ground(spec)
    assert not np.iscomplexobj(rep.phi)
    assert rep.phi.min() >= -1e-10


def test_iterates_stay_normalized_in_reports():
    spec = ProblemSpec(bc=D, n=(128,), beta=12.0, lengths=(2.0,))
    rep = solve_ground(spec)
    g = make_grid(BoxDomain((2.0,)), 128, D)
    assert abs(g.norm(rep.phi) - 1.0) <= 1e-12
