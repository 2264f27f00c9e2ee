"""Named desk-scale figure recipes.

Each recipe runs pinned sweeps (grid sizes and beta windows fixed in code,
so reproducing a figure is one command) and writes whitespace-delimited
two-column series files ``beta value`` plus a manifest. Rendering is left
to the caller's plotting tool of choice.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from gpegap import asymptotics
from gpegap.domain import BoundaryCondition, HarmonicPotential, NonconvexDemo, ZeroPotential
from gpegap.gaps import conjecture_bounds, fingerprint_for
from gpegap.solver import ExcitedMode, ProblemSpec, SolverConfig, continue_in_beta

PI = math.pi


def _write_series(outdir: Path, name: str, xs, ys) -> tuple[str, Path]:
    path = outdir / f"{name}.dat"
    lines = [f"{x:.17g} {y:.17g}" for x, y in zip(xs, ys)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return name, path


def _sweep(spec: ProblemSpec, betas, mode: ExcitedMode, **cfg_kw):
    gs = continue_in_beta(spec, betas, SolverConfig(**cfg_kw))
    es = continue_in_beta(spec, betas, SolverConfig(excited=mode, **cfg_kw))
    for rep in gs + es:
        if not rep.converged:
            raise RuntimeError(f"recipe solve failed at beta={rep.beta}: {rep.message}")
    de = [e.breakdown.total - g.breakdown.total for g, e in zip(gs, es)]
    dmu = [e.breakdown.mu - g.breakdown.mu for g, e in zip(gs, es)]
    return de, dmu


def box_1d_gaps(outdir: Path, jobs: int = 1):
    betas = [0.0] + [float(b) for b in np.geomspace(0.5, 500.0, 10)]
    spec = ProblemSpec(bc=BoundaryCondition.DIRICHLET, n=(512,), beta=0.0, lengths=(2.0,))
    de, dmu = _sweep(spec, betas, ExcitedMode.ODD_X1)
    written = [
        _write_series(outdir, "numeric_delta_E", betas, de),
        _write_series(outdir, "numeric_delta_mu", betas, dmu),
    ]
    weak_b = [b for b in betas if b <= 2.0]
    weak = [asymptotics.box_gap_weak_secondorder((2.0,), b).delta_e for b in weak_b]
    strong_b = [b for b in betas if b >= 5.0]
    strong = [asymptotics.box_gap_strong((2.0,), b).delta_e for b in strong_b]
    bound = conjecture_bounds(
        fingerprint_for(BoundaryCondition.DIRICHLET, ZeroPotential(), lengths=(2.0,))
    ).delta_e_inf
    written += [
        _write_series(outdir, "weak_delta_E", weak_b, weak),
        _write_series(outdir, "strong_delta_E", strong_b, strong),
        _write_series(outdir, "bound_delta_E", betas, [bound] * len(betas)),
    ]
    return written


def harmonic_1d_gaps(outdir: Path, jobs: int = 1):
    betas = [0.0] + [float(b) for b in np.geomspace(0.01, 1000.0, 12)]
    spec = ProblemSpec(
        bc=BoundaryCondition.TRUNCATED_WHOLE_SPACE, n=(1024,), beta=0.0,
        potential=HarmonicPotential((1.0,)),
    )
    de, dmu = _sweep(spec, betas, ExcitedMode.ODD_X1)
    written = [
        _write_series(outdir, "numeric_delta_E", betas, de),
        _write_series(outdir, "numeric_delta_mu", betas, dmu),
    ]
    weak_b = [b for b in betas if b <= 2.0]
    weak = [asymptotics.harmonic_gap_weak((1.0,), b).delta_e for b in weak_b]
    strong_b = [b for b in betas if b >= 5.0]
    strong = [asymptotics.harmonic_strong((1.0,), b, higher_order=True)[1].delta_e
              for b in strong_b]
    bound = math.sqrt(2.0) / 2.0
    written += [
        _write_series(outdir, "weak_delta_E", weak_b, weak),
        _write_series(outdir, "strong_delta_E", strong_b, strong),
        _write_series(outdir, "bound_delta_E", betas, [bound] * len(betas)),
    ]
    return written


def box_2d_degenerate_gaps(outdir: Path, jobs: int = 1):
    """Vortex vs odd-in-x1 branches on the unit square (minutes of runtime)."""
    betas = [200.0, 500.0, 1000.0, 2000.0]
    spec = ProblemSpec(bc=BoundaryCondition.DIRICHLET, n=(128, 128), beta=0.0,
                       lengths=(1.0, 1.0))
    cfg = dict(eps_stop=1e-5, tau_growth=1.02, tau_max=2e-3)
    gs = continue_in_beta(spec, betas, SolverConfig(**cfg))
    vs = continue_in_beta(spec, betas, SolverConfig(excited=ExcitedMode.VORTEX, **cfg))
    xs = continue_in_beta(spec, betas, SolverConfig(excited=ExcitedMode.ODD_X1, **cfg))
    for rep in gs + vs + xs:
        if not rep.converged:
            raise RuntimeError(f"recipe solve failed at beta={rep.beta}: {rep.message}")
    de_v = [v.breakdown.total - g.breakdown.total for g, v in zip(gs, vs)]
    de_x = [x.breakdown.total - g.breakdown.total for g, x in zip(gs, xs)]
    asym = [asymptotics.box_degenerate_strong_2d(1.0, b)[2] for b in betas]
    bound = conjecture_bounds(
        fingerprint_for(BoundaryCondition.DIRICHLET, ZeroPotential(),
                        lengths=(1.0, 1.0), degenerate=True)
    ).delta_e_inf
    return [
        _write_series(outdir, "numeric_delta_E_vortex", betas, de_v),
        _write_series(outdir, "numeric_delta_E_odd_x1", betas, de_x),
        _write_series(outdir, "strong_log_delta_E", betas, asym),
        _write_series(outdir, "bound_delta_E", betas, [bound] * len(betas)),
    ]


def neumann_1d_gaps(outdir: Path, jobs: int = 1):
    betas = [0.0] + [float(b) for b in np.geomspace(0.5, 1000.0, 10)]
    spec = ProblemSpec(bc=BoundaryCondition.NEUMANN, n=(512,), beta=0.0, lengths=(2.0,))
    de, dmu = _sweep(spec, betas, ExcitedMode.ODD_X1)
    written = [
        _write_series(outdir, "numeric_delta_E", betas, de),
        _write_series(outdir, "numeric_delta_mu", betas, dmu),
    ]
    weak_b = [b for b in betas if b <= 2.0]
    weak = [asymptotics.neumann_asym((2.0,), b, regime="weak")[1].delta_e for b in weak_b]
    strong_b = [b for b in betas if b >= 5.0]
    strong = [asymptotics.neumann_asym((2.0,), b, regime="strong")[1].delta_e
              for b in strong_b]
    bound = PI**2 / (2.0 * 4.0)
    written += [
        _write_series(outdir, "weak_delta_E", weak_b, weak),
        _write_series(outdir, "strong_delta_E", strong_b, strong),
        _write_series(outdir, "bound_delta_E", betas, [bound] * len(betas)),
    ]
    return written


def periodic_gaps(outdir: Path, jobs: int = 1):
    betas = [0.0, 1.0, 10.0, 100.0]
    spec = ProblemSpec(bc=BoundaryCondition.PERIODIC, n=(16384,), beta=0.0, lengths=(1.0,))
    de, dmu = _sweep(spec, betas, ExcitedMode.PLANE_WAVE_X1)
    exact = [2.0 * PI**2] * len(betas)
    return [
        _write_series(outdir, "numeric_delta_E", betas, de),
        _write_series(outdir, "numeric_delta_mu", betas, dmu),
        _write_series(outdir, "exact_delta_E", betas, exact),
        _write_series(outdir, "bound_delta_E", betas, exact),
    ]


def nonconvex_counterexamples(outdir: Path, jobs: int = 1):
    """Gap curves for the two nonconvex demo potentials on (0, 2); the
    Dirichlet bound is emitted for reference although it does not apply.
    The fine beta spacing keeps the damped self-consistent excited solves
    on the continuation path."""
    betas = [0.0] + [float(b) for b in np.geomspace(0.5, 100.0, 12)]
    written = []
    for label, variant in (("neg_quadratic", "neg-quadratic"), ("sine", "sine")):
        spec = ProblemSpec(bc=BoundaryCondition.DIRICHLET, n=(512,), beta=0.0,
                           lengths=(2.0,), potential=NonconvexDemo(variant))
        de, dmu = _sweep(spec, betas, ExcitedMode.LOWEST2_SCF)
        written.append(_write_series(outdir, f"numeric_delta_E_{label}", betas, de))
        written.append(_write_series(outdir, f"numeric_delta_mu_{label}", betas, dmu))
    bound = 3.0 * PI**2 / (2.0 * 4.0)
    written.append(_write_series(outdir, "dirichlet_bound_reference", betas,
                                 [bound] * len(betas)))
    return written


RECIPES = {
    "box-1d-gaps": box_1d_gaps,
    "harmonic-1d-gaps": harmonic_1d_gaps,
    "box-2d-degenerate-gaps": box_2d_degenerate_gaps,
    "neumann-1d-gaps": neumann_1d_gaps,
    "periodic-gaps": periodic_gaps,
    "nonconvex-counterexamples": nonconvex_counterexamples,
}
