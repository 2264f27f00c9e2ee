import math

import numpy as np
import pytest

from gpegap import asymptotics
from gpegap.domain import BoundaryCondition, BoxDomain, make_grid
from gpegap.functional import (
    apply_hamiltonian,
    eigen_residual,
    energy,
    normalize,
)

D = BoundaryCondition.DIRICHLET
N = BoundaryCondition.NEUMANN
P = BoundaryCondition.PERIODIC

PI = math.pi


def box_grid(n=512, L=2.0):
    return make_grid(BoxDomain((L,)), n, D)


def sampled_mode(grid, k=1):
    """Exact discrete eigenvector of the Dirichlet FD Laplacian."""
    x = grid.axes[0]
    L = grid.domain.lengths[0]
    return normalize(np.sin(k * PI * x / L), grid)


def discrete_eigenvalue(grid, k=1):
    h = grid.h[0]
    L = grid.domain.lengths[0]
    return (1.0 - math.cos(k * PI * h / L)) / h**2  # (1/2) lambda_h


def test_normalize_constant():
    g = make_grid(BoxDomain((1.0,)), 64, P)
    out = normalize(np.full(64, 2.0), g)
    assert np.allclose(out, 1.0, atol=1e-15)


def test_normalize_idempotent():
    g = box_grid(64)
    rng = np.random.default_rng(1)
    phi = normalize(rng.random(64) + 0.1, g)
    again = normalize(phi, g)
    assert np.max(np.abs(again - phi)) < 1e-15
    assert abs(g.norm(phi) - 1.0) < 1e-13


def test_normalize_zero_field_rejected():
    g = box_grid(64)
    with pytest.raises(ValueError):
        normalize(np.zeros(64), g)


def test_energy_linear_box_ground():
    g = box_grid(512)
    phi, _ = asymptotics.profile("box-linear-ground", g)
    br = energy(phi, np.zeros(g.shape), 0.0, g)
    assert br.total == pytest.approx(PI**2 / 8, abs=5e-4)
    # and exactly the discrete eigenvalue
    assert br.total == pytest.approx(discrete_eigenvalue(g, 1), rel=1e-10)


def test_energy_weak_interaction_shift():
    # int sin^4 term: E(beta) = E(0) + 0.375 beta for L=2 (exact discrete sum)
    g = box_grid(512)
    phi, _ = asymptotics.profile("box-linear-ground", g)
    br = energy(phi, np.zeros(g.shape), 0.1, g)
    assert br.total == pytest.approx(discrete_eigenvalue(g, 1) + 0.0375, rel=1e-10)
    assert br.total == pytest.approx(1.2712, abs=5e-4)


def test_energy_neumann_constant_exact():
    g = make_grid(BoxDomain((2.0,)), 64, N)
    phi = normalize(np.ones(64), g)
    br = energy(phi, np.zeros(64), 4.0, g)
    assert br.total == pytest.approx(1.0, rel=1e-14)
    assert br.mu == pytest.approx(2.0, rel=1e-14)


def test_energy_rejects_negative_beta_and_nan():
    g = box_grid(64)
    phi = sampled_mode(g)
    with pytest.raises(ValueError):
        energy(phi, np.zeros(64), -1.0, g)
    bad = phi.copy()
    bad[3] = np.nan
    with pytest.raises(ValueError):
        energy(bad, np.zeros(64), 0.0, g)


def test_mu_identity_exact():
    g = box_grid(128)
    rng = np.random.default_rng(5)
    phi = normalize(rng.random(128) + 0.2, g)
    br = energy(phi, np.zeros(128), 3.7, g)
    assert br.mu - br.total == pytest.approx(0.5 * 3.7 * br.interaction, rel=1e-15)


def test_energy_phase_invariance():
    g = box_grid(128)
    phi = sampled_mode(g).astype(complex)
    br0 = energy(phi, np.zeros(128), 2.0, g)
    for theta in (0.3, 1.1, 2.9):
        br = energy(np.exp(1j * theta) * phi, np.zeros(128), 2.0, g)
        assert br.total == pytest.approx(br0.total, abs=1e-13)


def test_breakdown_nonnegative_for_nonnegative_potential():
    g = box_grid(96)
    rng = np.random.default_rng(11)
    phi = normalize(rng.random(96) + 0.05, g)
    V = rng.random(96)
    br = energy(phi, V, 1.0, g)
    assert br.kinetic >= 0 and br.potential >= 0 and br.interaction >= 0


@pytest.mark.parametrize("bc", [D, N, P])
def test_kinetic_summation_by_parts(bc):
    # <phi, -1/2 Lap phi> equals the face-difference sum exactly, per BC
    g = make_grid(BoxDomain((2.0,)), 64, bc)
    rng = np.random.default_rng(13)
    phi = rng.standard_normal(64)
    h = g.h[0]
    kin = float(g.integrate(phi * (-0.5 * g.laplacian(phi))))
    if bc is D:
        ext = np.concatenate([[0.0], phi, [0.0]])
        faces = np.diff(ext)
        face_sum = 0.5 * np.sum(faces**2) / h
    elif bc is P:
        faces = np.diff(np.concatenate([phi, phi[:1]]))
        face_sum = 0.5 * np.sum(faces**2) / h
    else:
        faces = np.diff(phi)
        face_sum = 0.5 * np.sum(faces**2) / h
    assert kin == pytest.approx(face_sum, rel=1e-12)


def test_apply_hamiltonian_linear_eigenfield():
    g = box_grid(64)
    phi = sampled_mode(g)
    out = apply_hamiltonian(phi, np.zeros(64), 0.0, g)
    lam = discrete_eigenvalue(g, 1)
    assert np.max(np.abs(out - lam * phi)) < 1e-12


def test_apply_hamiltonian_constant_periodic():
    g = make_grid(BoxDomain((1.0,)), 64, P)
    phi = normalize(np.ones(64), g)
    beta = 3.0
    out = apply_hamiltonian(phi, np.zeros(64), beta, g)
    assert np.allclose(out, beta * phi**3, atol=1e-13)


def test_eigen_residual_exact_mode():
    g = box_grid(64)
    phi = sampled_mode(g)
    assert eigen_residual(phi, np.zeros(64), 0.0, g) < 1e-12


def test_eigen_residual_wrong_state_large():
    # the linear ground state is far from stationary at beta = 10
    g = box_grid(256)
    phi = sampled_mode(g)
    r = eigen_residual(phi, np.zeros(256), 10.0, g)
    assert r > 1.0


def test_tf_profile_interior_residual_small():
    # strong-interaction TF ground profile: the stationarity defect away from
    # the boundary layer is much smaller than at the layer
    beta = 1000.0
    gammas = (1.0,)
    mu = asymptotics.harmonic_mu_tf(gammas, beta)
    half = 1.5 * math.sqrt(2 * mu)
    g = make_grid(BoxDomain((2 * half,), origin=(-half,)), 2048, D)
    V = 0.5 * g.axes[0] ** 2
    phi, _ = asymptotics.profile("harmonic-tf-ground", g, gammas=gammas, mu=mu, beta=beta)
    br = energy(phi, V, beta, g)
    res = apply_hamiltonian(phi, V, beta, g) - br.mu * phi
    x = g.axes[0]
    edge = math.sqrt(2 * mu)
    interior = np.abs(x) < 0.8 * edge
    layer = (np.abs(x) >= 0.9 * edge) & (np.abs(x) <= 1.1 * edge)
    assert np.max(np.abs(res[interior])) < 0.02 * np.max(np.abs(res[layer]))
