"""Command-line frontend.

Subcommands:

* ``solve``      one ground or excited solve, JSON report + optional binary field
* ``gap-sweep``  beta sweep producing a gap-curve CSV and a conjecture JSON
* ``asym``       closed-form values, regime tagged
* ``figure``     named desk-scale recipes emitting plot-ready data series

Configuration comes from an optional plain-text ``key = value`` file plus
flags; flags win. With ``--jobs 1`` (the default) sweeps run sequentially
with warm-started continuation and all outputs are byte-identical across
runs. With more jobs the per-beta solves run cold in a process pool
(ordering of output rows stays by beta).

Exit codes: 0 success, 2 configuration error, 3 convergence failure,
4 partial sweep failure.

Environment: ``GPEGAP_LOG`` sets the log level (e.g. info, debug).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from gpegap import asymptotics
from gpegap.domain import (
    BoundaryCondition,
    HarmonicPlusCosine,
    HarmonicPotential,
    NonconvexDemo,
    Potential,
    ShiftedQuadratic,
    TabulatedPotential,
    ZeroPotential,
    eval_potential,
    make_grid,
)
from gpegap.fieldio import save_field
from gpegap.gaps import (
    build_gap_curve,
    check_conjecture,
    compare_numeric_asymptotic,
    conjecture_bounds,
    fingerprint_for,
)
from gpegap.solver import (
    ExcitedMode,
    ProblemSpec,
    SolverConfig,
    SolveReport,
    SolverError,
    continue_in_beta,
    solve_excited,
    solve_ground,
)

log = logging.getLogger("gpegap")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3
EXIT_PARTIAL = 4

CSV_HEADER = (
    "beta,E_g,mu_g,E_1,mu_1,delta_E,delta_mu,"
    "residual_g,residual_1,iters_g,iters_1,status"
)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Everything one run needs; round-trips through the key=value format."""

    bc: str = "dirichlet"
    lengths: tuple[float, ...] | None = None
    gamma: tuple[float, ...] | None = None
    potential: str = "zero"
    v0: float = 0.0
    k: float = 1.0
    center: float = 1.0
    potential_file: str | None = None
    beta: tuple[float, ...] = (0.0,)
    beta_min: float | None = None
    beta_max: float | None = None
    beta_count: int = 0
    n: tuple[int, ...] | None = None
    excited: str = "auto"
    tau: float | None = None
    eps_stop: float = 1e-7
    resid_tol: float = 1e-6
    max_iter: int = 100_000
    tau_growth: float = 1.0
    tau_max: float = 5e-3
    degenerate: str = "auto"
    gamma_v: float | None = None
    seed: int = 0
    perturb: float = 0.0
    jobs: int = 1

    def to_text(self) -> str:
        lines = []
        for key, val in asdict(self).items():
            if val is None:
                continue
            if isinstance(val, tuple):
                val = " ".join(repr(v) for v in val)
            lines.append(f"{key} = {val}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        cfg = cls()
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
            key, val = (part.strip() for part in line.split("=", 1))
            if not hasattr(cfg, key):
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            setattr(cfg, key, _coerce(key, val))
        return cfg


_TUPLE_FLOAT_KEYS = {"lengths", "gamma", "beta"}
_TUPLE_INT_KEYS = {"n"}
_FLOAT_KEYS = {"v0", "k", "center", "tau", "eps_stop", "resid_tol", "tau_growth",
               "tau_max", "gamma_v", "perturb", "beta_min", "beta_max"}
_INT_KEYS = {"max_iter", "seed", "jobs", "beta_count"}


def _coerce(key: str, val: str):
    if key in _TUPLE_FLOAT_KEYS:
        return tuple(float(v) for v in val.split())
    if key in _TUPLE_INT_KEYS:
        return tuple(int(v) for v in val.split())
    if key in _FLOAT_KEYS:
        return float(val)
    if key in _INT_KEYS:
        return int(val)
    return val


def _fmt(x: float) -> str:
    return f"{x:.17g}"


# ---------------------------------------------------------------------------
# Config -> problem objects
# ---------------------------------------------------------------------------


def build_potential(cfg: RunConfig, shape=None) -> Potential:
    name = cfg.potential
    if name == "zero":
        return ZeroPotential()
    if name == "harmonic":
        if not cfg.gamma:
            raise ConfigError("harmonic potential needs --gamma")
        return HarmonicPotential(tuple(cfg.gamma))
    if name == "harmonic-cosine":
        if not cfg.gamma or len(cfg.gamma) != 1:
            raise ConfigError("harmonic-cosine potential needs a single --gamma")
        return HarmonicPlusCosine(cfg.gamma[0], cfg.v0, cfg.k)
    if name == "shifted-quadratic":
        return ShiftedQuadratic(cfg.v0, cfg.center)
    if name == "nonconvex-neg-quadratic":
        return NonconvexDemo("neg-quadratic")
    if name == "nonconvex-sine":
        return NonconvexDemo("sine")
    if name == "file":
        if not cfg.potential_file:
            raise ConfigError("potential 'file' needs --potential-file")
        if shape is None:
            raise ConfigError("tabulated potentials need an explicit grid size")
        return TabulatedPotential.from_text(cfg.potential_file, shape,
                                            declared_modulus=cfg.gamma_v)
    raise ConfigError(f"unknown potential {cfg.potential!r}")


DEFAULT_N = {1: (512,), 2: (96, 96), 3: (48, 48, 48)}


def build_spec(cfg: RunConfig, beta: float) -> ProblemSpec:
    try:
        bc = BoundaryCondition(cfg.bc)
    except ValueError as exc:
        raise ConfigError(f"unknown boundary condition {cfg.bc!r}") from exc
    if bc is BoundaryCondition.TRUNCATED_WHOLE_SPACE or (
        cfg.lengths is None and cfg.gamma is not None
    ):
        bc = BoundaryCondition.TRUNCATED_WHOLE_SPACE
        if not cfg.gamma:
            raise ConfigError("whole-space problems need --gamma")
        dim = len(cfg.gamma)
        pot = build_potential(replace_potential_default(cfg), None)
        n = cfg.n or DEFAULT_N[dim]
        spec = ProblemSpec(bc=bc, n=n, beta=beta, potential=pot,
                           degenerate=_degenerate_override(cfg))
        return spec
    if not cfg.lengths:
        raise ConfigError("bounded problems need --lengths")
    dim = len(cfg.lengths)
    n = cfg.n or DEFAULT_N[dim]
    pot = build_potential(cfg, n)
    return ProblemSpec(bc=bc, n=n, beta=beta, lengths=tuple(cfg.lengths),
                       potential=pot, degenerate=_degenerate_override(cfg))


def replace_potential_default(cfg: RunConfig) -> RunConfig:
    if cfg.potential == "zero":
        return replace(cfg, potential="harmonic")
    return cfg


def _degenerate_override(cfg: RunConfig) -> bool | None:
    if cfg.degenerate == "auto":
        return None
    if cfg.degenerate in ("true", "yes", "1"):
        return True
    if cfg.degenerate in ("false", "no", "0"):
        return False
    raise ConfigError(f"--degenerate must be auto/true/false, got {cfg.degenerate!r}")


def solver_config(cfg: RunConfig, excited: ExcitedMode = ExcitedMode.NONE) -> SolverConfig:
    return SolverConfig(
        tau=cfg.tau, eps_stop=cfg.eps_stop, resid_tol=cfg.resid_tol,
        max_iter=cfg.max_iter, tau_growth=cfg.tau_growth, tau_max=cfg.tau_max,
        excited=excited, perturb=cfg.perturb, seed=cfg.seed,
    )


def pick_excited_mode(cfg: RunConfig, spec: ProblemSpec) -> ExcitedMode:
    """Default branch for the first excited state: plane wave on periodic
    grids, vortex in the degenerate case, odd-in-x1 otherwise. Potentials
    with no midline symmetry are refused unless --excited scf is explicit."""
    if cfg.excited != "auto":
        return ExcitedMode(cfg.excited)
    if spec.bc is BoundaryCondition.PERIODIC:
        return ExcitedMode.PLANE_WAVE_X1
    if spec.is_degenerate() and spec.dim >= 2:
        return ExcitedMode.VORTEX
    grid = make_grid(spec.domain(), spec.n, spec.bc)
    V = eval_potential(spec.potential, grid)
    if not np.allclose(V, grid.mirror(V, axis=0), atol=1e-11):
        raise ConfigError(
            "the potential is not symmetric about the x1 midline, so no "
            "symmetry-protected excited branch exists; pass --excited scf "
            "(1D) to use the self-consistent two-eigenpair solve"
        )
    return ExcitedMode.ODD_X1


def betas_from(cfg: RunConfig) -> list[float]:
    """Explicit list, or log spacing with beta = 0 prepended."""
    if cfg.beta_count and cfg.beta_max is not None:
        lo = cfg.beta_min if cfg.beta_min else max(cfg.beta_max * 1e-4, 1e-2)
        pts = np.geomspace(lo, cfg.beta_max, cfg.beta_count)
        return [0.0] + [float(b) for b in pts]
    return [float(b) for b in cfg.beta]


# ---------------------------------------------------------------------------
# Reporting
# ---------------------------------------------------------------------------


def report_to_dict(rep: SolveReport) -> dict:
    d = {
        "beta": rep.beta,
        "status": rep.status,
        "mode": rep.mode.value,
        "iterations": rep.iterations,
        "residual": rep.residual,
        "message": rep.message,
    }
    if rep.breakdown is not None:
        d.update(
            E=rep.breakdown.total,
            mu=rep.breakdown.mu,
            kinetic=rep.breakdown.kinetic,
            potential=rep.breakdown.potential,
            interaction=rep.breakdown.interaction,
        )
    if "winding" in rep.extras:
        d["winding"] = rep.extras["winding"]
    if "max_symmetry_drift" in rep.extras:
        d["max_symmetry_drift"] = rep.extras["max_symmetry_drift"]
    return d


def write_json(path, payload: dict) -> None:
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def curve_rows(betas, gs: list[SolveReport], es: list[SolveReport]) -> list[str]:
    rows = []
    for b, rg, re_ in zip(betas, gs, es):
        ok = rg.converged and re_.converged
        if ok:
            vals = [
                b, rg.breakdown.total, rg.breakdown.mu, re_.breakdown.total,
                re_.breakdown.mu, re_.breakdown.total - rg.breakdown.total,
                re_.breakdown.mu - rg.breakdown.mu, rg.residual, re_.residual,
            ]
            row = ",".join(_fmt(v) for v in vals)
            row += f",{rg.iterations},{re_.iterations},ok"
        else:
            row = _fmt(b) + "," + ",".join(["nan"] * 8)
            row += f",{rg.iterations},{re_.iterations},failed"
        rows.append(row)
    return rows


def write_csv(path, betas, gs, es) -> None:
    lines = [CSV_HEADER] + curve_rows(betas, gs, es)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_solve(cfg: RunConfig, args) -> int:
    beta = cfg.beta[0]
    spec = build_spec(cfg, beta)
    if cfg.excited not in ("none", "auto"):
        mode = ExcitedMode(cfg.excited)
        rep = solve_excited(spec, solver_config(cfg, mode))
    else:
        rep = solve_ground(spec, solver_config(cfg))
    payload = report_to_dict(rep)
    if args.out:
        write_json(args.out, payload)
    else:
        print(json.dumps(payload, sort_keys=True, indent=2))
    if args.field_out and rep.phi is not None:
        grid = make_grid(spec.domain(), spec.n, spec.bc)
        save_field(args.field_out, rep.phi, grid, beta)
    if not rep.converged:
        log.error("solve did not converge: %s", rep.message)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _sweep_one(payload) -> tuple[SolveReport, SolveReport]:
    """Cold ground+excited solve at one beta (process-pool worker)."""
    cfg, beta, mode_value = payload
    spec = build_spec(cfg, beta)
    rep_g = solve_ground(spec, solver_config(cfg))
    rep_e = solve_excited(spec, solver_config(cfg, ExcitedMode(mode_value)))
    return rep_g, rep_e


def run_sweep(cfg: RunConfig, betas: list[float]) -> tuple[list[SolveReport], list[SolveReport], ExcitedMode]:
    spec0 = build_spec(cfg, betas[-1])
    mode = pick_excited_mode(cfg, spec0)
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            out = list(pool.map(_sweep_one, [(cfg, b, mode.value) for b in betas]))
        gs = [g for g, _ in out]
        es = [e for _, e in out]
        return gs, es, mode
    spec_t = build_spec(cfg, 0.0)
    gs = continue_in_beta(spec_t, betas, solver_config(cfg))
    es = continue_in_beta(spec_t, betas, solver_config(cfg, mode))
    return gs, es, mode


def cmd_gap_sweep(cfg: RunConfig, args) -> int:
    betas = betas_from(cfg)
    if not betas:
        raise ConfigError("empty beta list")
    if sorted(betas) != betas or len(set(betas)) != len(betas):
        raise ConfigError("beta list must be strictly ascending")
    gs, es, mode = run_sweep(cfg, betas)
    write_csv(args.csv_out, betas, gs, es)
    log.info("wrote %s", args.csv_out)

    payload: dict = {"betas": betas, "excited_mode": mode.value}
    ok = all(g.converged and e.converged for g, e in zip(gs, es))
    if ok:
        spec0 = build_spec(cfg, betas[0])
        fp = fingerprint_for(
            spec0.bc, spec0.potential,
            lengths=spec0.lengths if spec0.bc is not BoundaryCondition.TRUNCATED_WHOLE_SPACE else None,
            gammas=spec0.trap_gammas(),
            degenerate=spec0.is_degenerate(),
            gamma_v=cfg.gamma_v,
        )
        curve = build_gap_curve(gs, es, betas, fp)
        bounds = conjecture_bounds(fp)
        report = check_conjecture(curve, bounds, tol=args.margin_tol)
        payload["conjecture"] = {
            "family": report.family,
            "applicable": report.applicable,
            "bound_delta_E": bounds.delta_e_inf,
            "bound_delta_mu": bounds.delta_mu_inf,
            "min_delta_E": report.min_delta_e,
            "min_delta_mu": report.min_delta_mu,
            "violations": report.violations,
            "monotonicity_delta_E": report.monotonicity_e,
            "monotonicity_delta_mu": report.monotonicity_mu,
            "note": report.note,
        }
        comp = compare_numeric_asymptotic(curve)
        payload["asymptotic_comparison"] = [
            {
                "beta": r.beta, "quantity": r.quantity, "numeric": r.numeric,
                "asymptotic": r.asymptotic, "regime": r.regime, "rel_diff": r.rel_diff,
            }
            for r in comp.rows
        ]
        if comp.slope_fit:
            payload["log_slope_fit"] = comp.slope_fit
    if args.json_out:
        write_json(args.json_out, payload)
    if not ok:
        log.error("sweep had failures")
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_asym(cfg: RunConfig, args) -> int:
    kind = args.problem
    beta = cfg.beta[0]
    try:
        rows = asymptotics.estimate_table(
            kind, beta=beta, lengths=cfg.lengths, gammas=cfg.gamma,
            degenerate=_degenerate_override(cfg), regime=args.regime,
            higher_order=args.higher_order,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    flagged = [r for r in rows if r.extrapolated]
    if flagged and not args.force:
        log.error(
            "regime %r is extrapolated at beta=%g (pass --force to evaluate anyway)",
            args.regime, beta,
        )
        return EXIT_CONFIG
    lines = [f"{'quantity':<10} {'value':<24} {'regime':<12} note"]
    for r in rows:
        mark = " [extrapolated]" if r.extrapolated else ""
        lines.append(f"{r.name:<10} {_fmt(r.value):<24} {r.regime.value:<12} {r.note}{mark}")
    text = "\n".join(lines)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_figure(cfg: RunConfig, args) -> int:
    from gpegap import recipes

    try:
        recipe = recipes.RECIPES[args.recipe]
    except KeyError:
        raise ConfigError(
            f"unknown recipe {args.recipe!r}; available: {', '.join(sorted(recipes.RECIPES))}"
        )
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = recipe(outdir, jobs=cfg.jobs)
    manifest = outdir / "manifest.txt"
    manifest.write_text(
        "\n".join(f"{name} {path.name}" for name, path in written) + "\n",
        encoding="utf-8",
    )
    log.info("wrote %d series to %s", len(written), outdir)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _add_problem_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--bc", choices=[b.value for b in BoundaryCondition])
    p.add_argument("--lengths", nargs="+", type=float)
    p.add_argument("--gamma", nargs="+", type=float)
    p.add_argument("--potential", choices=[
        "zero", "harmonic", "harmonic-cosine", "shifted-quadratic",
        "nonconvex-neg-quadratic", "nonconvex-sine", "file",
    ])
    p.add_argument("--potential-file", dest="potential_file")
    p.add_argument("--v0", type=float)
    p.add_argument("--k", type=float)
    p.add_argument("--center", type=float)
    p.add_argument("--beta", nargs="+", type=float)
    p.add_argument("--beta-min", type=float, dest="beta_min")
    p.add_argument("--beta-max", type=float, dest="beta_max")
    p.add_argument("--beta-count", type=int, dest="beta_count")
    p.add_argument("--n", nargs="+", type=int)
    p.add_argument("--excited", choices=["auto"] + [m.value for m in ExcitedMode])
    p.add_argument("--tau", type=float)
    p.add_argument("--eps-stop", type=float, dest="eps_stop")
    p.add_argument("--resid-tol", type=float, dest="resid_tol")
    p.add_argument("--max-iter", type=int, dest="max_iter")
    p.add_argument("--tau-growth", type=float, dest="tau_growth")
    p.add_argument("--tau-max", type=float, dest="tau_max")
    p.add_argument("--degenerate", choices=["auto", "true", "false"])
    p.add_argument("--gamma-v", type=float, dest="gamma_v")
    p.add_argument("--seed", type=int)
    p.add_argument("--perturb", type=float)
    p.add_argument("--jobs", type=int)


def merge_config(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        try:
            cfg = RunConfig.from_text(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
    for key in vars(cfg):
        val = getattr(args, key, None)
        if val is not None:
            if isinstance(val, list):
                val = tuple(val)
            setattr(cfg, key, val)
    return cfg


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("GPEGAP_LOG", "warning").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = argparse.ArgumentParser(
        prog="gpegap",
        description="Ground/excited states and fundamental gaps of the "
        "Gross-Pitaevskii equation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="one ground or excited solve")
    _add_problem_flags(p_solve)
    p_solve.add_argument("--out", help="JSON report path (default: stdout)")
    p_solve.add_argument("--field-out", dest="field_out", help="binary field path")

    p_sweep = sub.add_parser("gap-sweep", help="beta sweep with gap CSV + conjecture JSON")
    _add_problem_flags(p_sweep)
    p_sweep.add_argument("--csv-out", dest="csv_out", required=True)
    p_sweep.add_argument("--json-out", dest="json_out")
    p_sweep.add_argument("--margin-tol", dest="margin_tol", type=float, default=0.0,
                         help="numerical slack for conjecture margins")

    p_asym = sub.add_parser("asym", help="closed-form values, regime tagged")
    p_asym.add_argument("problem", choices=["box", "harmonic", "periodic", "neumann"])
    _add_problem_flags(p_asym)
    p_asym.add_argument("--regime", choices=["auto", "weak", "strong", "exact"],
                        default="auto")
    p_asym.add_argument("--higher-order", dest="higher_order", action="store_true")
    p_asym.add_argument("--force", action="store_true",
                        help="evaluate even outside the formula's regime")
    p_asym.add_argument("--out")

    p_fig = sub.add_parser("figure", help="emit plot-ready data for a named recipe")
    _add_problem_flags(p_fig)
    p_fig.add_argument("--recipe", required=True)
    p_fig.add_argument("--outdir", required=True)

    args = parser.parse_args(argv)

    try:
        cfg = merge_config(args)
        if args.command == "solve":
            return cmd_solve(cfg, args)
        if args.command == "gap-sweep":
            return cmd_gap_sweep(cfg, args)
        if args.command == "asym":
            return cmd_asym(cfg, args)
        if args.command == "figure":
            return cmd_figure(cfg, args)
        raise ConfigError(f"unknown command {args.command}")
    except ConfigError as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED


if __name__ == "__main__":
    sys.exit(main())
