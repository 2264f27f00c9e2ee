"""Linear solvers for the implicit gradient-flow step: direct banded
elimination in 1D (cyclic via Sherman-Morrison for periodic grids) and
Jacobi-preconditioned conjugate gradients in 2D/3D."""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded


def solve_tridiag(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray, b: np.ndarray):
    n = diag.size
    ab = np.zeros((3, n), dtype=np.result_type(diag, b))
    ab[0, 1:] = upper
    ab[1, :] = diag
    ab[2, :-1] = lower
    return solve_banded((1, 1), ab, b)


def solve_cyclic_tridiag(lower, diag, upper, corner_low, corner_up, b):
    """Tridiagonal system with wraparound corners A[0,-1]=corner_up,
    A[-1,0]=corner_low, via a rank-one update of a plain tridiagonal solve."""
    n = diag.size
    gamma = -diag[0]
    d = diag.copy()
    d[0] -= gamma
    d[-1] -= corner_up * corner_low / gamma
    u = np.zeros(n)
    u[0] = gamma
    u[-1] = corner_low
    y = solve_tridiag(lower, d, upper, b)
    q = solve_tridiag(lower, d, upper, u)
    # v = (1, 0, ..., 0, corner_up/gamma)
    vy = y[0] + corner_up / gamma * y[-1]
    vq = q[0] + corner_up / gamma * q[-1]
    return y - q * (vy / (1.0 + vq))


def pcg(apply_a, b, x0, inv_diag, rtol=1e-10, atol=0.0, maxiter=10_000):
    """Preconditioned conjugate gradients for a real-symmetric positive
    definite operator, complex right-hand sides allowed.

    Returns (x, iterations, achieved_residual_norm).
    """
    x = x0.copy()
    r = b - apply_a(x)
    bnorm = float(np.linalg.norm(b.ravel()))
    stop = max(rtol * bnorm, atol)
    rnorm = float(np.linalg.norm(r.ravel()))
    if rnorm <= stop:
        return x, 0, rnorm
    z = inv_diag * r
    p = z.copy()
    rz = float(np.real(np.vdot(r, z)))
    for it in range(1, maxiter + 1):
        ap = apply_a(p)
        alpha = rz / float(np.real(np.vdot(p, ap)))
        x += alpha * p
        r -= alpha * ap
        rnorm = float(np.linalg.norm(r.ravel()))
        if rnorm <= stop:
            return x, it, rnorm
        z = inv_diag * r
        rz_new = float(np.real(np.vdot(r, z)))
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, maxiter, rnorm
