"""Gap curves, conjectured lower bounds, and numeric-vs-closed-form
comparison reports.

A gap curve collects per-beta (E_g, mu_g, E_1, mu_1, delta_E, delta_mu)
rows from converged solves (or from the closed forms, tagged as such).
The conjectured lower bounds depend only on the problem class: boundary
condition, degeneracy of the second linear eigenvalue, and convexity of
the trapping potential. Bounds are never meaningful for nonconvex
potentials and are marked not applicable there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from gpegap import asymptotics
from gpegap.domain import BoundaryCondition, Potential
from gpegap.solver import SolveReport

PI = math.pi

MONOTONICITY_TOL = 1e-9


@dataclass(frozen=True)
class ProblemFingerprint:
    """What a gap curve was computed for; enough to select bounds."""

    bc: BoundaryCondition
    dim: int
    lengths: tuple[float, ...] | None = None
    gammas: tuple[float, ...] | None = None
    potential_name: str = "zero"
    degenerate: bool = False
    convex: bool = True
    gamma_v: float | None = None  # convexity modulus, whole-space bounds

    @property
    def diameter(self) -> float | None:
        if self.lengths is None:
            return None
        return math.sqrt(sum(L * L for L in self.lengths))

    @property
    def volume(self) -> float | None:
        if self.lengths is None:
            return None
        return math.prod(self.lengths)


def fingerprint_for(bc: BoundaryCondition, potential: Potential, *,
                    lengths=None, gammas=None, degenerate: bool = False,
                    gamma_v: float | None = None) -> ProblemFingerprint:
    """Build a fingerprint, deriving convexity from the potential unless the
    caller supplies an explicit modulus."""
    modulus = potential.convexity_modulus() if gamma_v is None else gamma_v
    dim = len(lengths) if lengths is not None else len(gammas)
    return ProblemFingerprint(
        bc=bc,
        dim=dim,
        lengths=tuple(lengths) if lengths is not None else None,
        gammas=tuple(gammas) if gammas is not None else None,
        potential_name=potential.name,
        degenerate=degenerate,
        convex=modulus is not None,
        gamma_v=modulus,
    )


@dataclass
class GapCurve:
    """Fundamental gaps over an ascending beta sweep."""

    betas: np.ndarray
    e_g: np.ndarray
    mu_g: np.ndarray
    e_1: np.ndarray
    mu_1: np.ndarray
    delta_e: np.ndarray
    delta_mu: np.ndarray
    sources: list[str]
    fingerprint: ProblemFingerprint
    extras: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.betas)


def build_gap_curve(reports_g: Sequence[SolveReport], reports_1: Sequence[SolveReport],
                    betas: Sequence[float], fingerprint: ProblemFingerprint) -> GapCurve:
    """Assemble a curve from matched ground/excited solves.

    All reports must be converged and carry the same betas in order; a
    nonpositive gap is reported as a data error, never clamped.
    """
    betas = np.asarray([float(b) for b in betas])
    if np.any(np.diff(betas) <= 0):
        raise ValueError("beta values must be strictly increasing")
    if len(reports_g) != len(betas) or len(reports_1) != len(betas):
        raise ValueError("report lists and beta list have different lengths")
    for rep, b in zip(list(reports_g) + list(reports_1), list(betas) * 2):
        if not rep.converged:
            raise ValueError(f"non-converged solve at beta={rep.beta}: {rep.message}")
    for rep, b in zip(reports_g, betas):
        if abs(rep.beta - b) > 1e-12 * max(1.0, b):
            raise ValueError(f"ground report beta {rep.beta} does not match sweep beta {b}")
    for rep, b in zip(reports_1, betas):
        if abs(rep.beta - b) > 1e-12 * max(1.0, b):
            raise ValueError(f"excited report beta {rep.beta} does not match sweep beta {b}")

    e_g = np.array([r.breakdown.total for r in reports_g])
    mu_g = np.array([r.breakdown.mu for r in reports_g])
    e_1 = np.array([r.breakdown.total for r in reports_1])
    mu_1 = np.array([r.breakdown.mu for r in reports_1])
    de = e_1 - e_g
    dmu = mu_1 - mu_g
    if np.any(de <= 0) or np.any(dmu <= 0):
        bad = betas[(de <= 0) | (dmu <= 0)]
        raise ValueError(
            f"nonpositive gap at beta={bad.tolist()}: the excited solve did not "
            "land above the ground state"
        )
    extras = {
        "residual_g": [r.residual for r in reports_g],
        "residual_1": [r.residual for r in reports_1],
        "iters_g": [r.iterations for r in reports_g],
        "iters_1": [r.iterations for r in reports_1],
    }
    return GapCurve(betas, e_g, mu_g, e_1, mu_1, de, dmu, ["numeric"] * len(betas),
                    fingerprint, extras)


# ---------------------------------------------------------------------------
# Conjectured lower bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConjectureBounds:
    """Lower bounds for inf over beta of the gaps, per problem family.

    ``stronger_*`` are the beta-dependent piecewise bounds available for the
    Dirichlet nondegenerate family (flat up to a breakpoint, then growing
    like sqrt(beta)); None elsewhere.
    """

    family: str
    applicable: bool
    delta_e_inf: float | None
    delta_mu_inf: float | None
    note: str = ""
    diameter: float | None = None
    volume: float | None = None
    gamma_v: float | None = None
    decays_to_zero: bool = False  # whole-space degenerate family

    def stronger_delta_e(self, beta: float) -> float | None:
        if self.family != "dirichlet-nondegenerate" or not self.applicable:
            return None
        d2 = self.diameter**2
        breakpoint = 81.0 * PI**4 * self.volume / (64.0 * d2)
        if beta <= breakpoint:
            return 3.0 * PI**2 / (2.0 * d2)
        return 4.0 * math.sqrt(beta) / (3.0 * self.diameter * math.sqrt(self.volume))

    def stronger_delta_mu(self, beta: float) -> float | None:
        if self.family != "dirichlet-nondegenerate" or not self.applicable:
            return None
        d2 = self.diameter**2
        breakpoint = 9.0 * PI**4 * self.volume / (16.0 * d2)
        if beta <= breakpoint:
            return 3.0 * PI**2 / (2.0 * d2)
        return 2.0 * math.sqrt(beta) / (self.diameter * math.sqrt(self.volume))


def conjecture_bounds(fp: ProblemFingerprint) -> ConjectureBounds:
    """Select the conjectured bounds for a classified problem."""
    if not fp.convex:
        return ConjectureBounds(
            family="not-applicable",
            applicable=False,
            delta_e_inf=None,
            delta_mu_inf=None,
            note="bounds are not valid for nonconvex trapping potentials",
        )

    if fp.bc is BoundaryCondition.TRUNCATED_WHOLE_SPACE:
        if fp.gamma_v is None or fp.gamma_v <= 0:
            return ConjectureBounds(
                family="not-applicable", applicable=False,
                delta_e_inf=None, delta_mu_inf=None,
                note="whole-space bounds need a positive convexity modulus",
            )
        if fp.degenerate:
            return ConjectureBounds(
                family="whole-space-degenerate", applicable=True,
                delta_e_inf=0.0, delta_mu_inf=0.0,
                gamma_v=fp.gamma_v, decays_to_zero=True,
                note="weak regime: delta >= gamma_v - C beta for some C > 0; "
                "gaps decay to zero as beta -> infinity",
            )
        val = math.sqrt(2.0) / 2.0 * fp.gamma_v
        return ConjectureBounds(
            family="whole-space-nondegenerate", applicable=True,
            delta_e_inf=val, delta_mu_inf=val, gamma_v=fp.gamma_v,
        )

    D = fp.diameter
    if D is None:
        raise ValueError("bounded-domain bounds need side lengths")
    d2 = D * D
    if fp.bc is BoundaryCondition.PERIODIC:
        return ConjectureBounds(
            family="periodic", applicable=True,
            delta_e_inf=2.0 * PI**2 / d2, delta_mu_inf=2.0 * PI**2 / d2,
            diameter=D, volume=fp.volume,
        )
    if fp.bc is BoundaryCondition.NEUMANN:
        return ConjectureBounds(
            family="neumann", applicable=True,
            delta_e_inf=PI**2 / (2.0 * d2), delta_mu_inf=PI**2 / (2.0 * d2),
            diameter=D, volume=fp.volume,
        )
    # Dirichlet
    if fp.degenerate:
        if fp.dim != 2:
            note = "degenerate bound stated for 2D"
        else:
            note = ""
        return ConjectureBounds(
            family="dirichlet-degenerate", applicable=True,
            delta_e_inf=PI**2 / (2.0 * d2), delta_mu_inf=3.0 * PI**2 / (8.0 * d2),
            diameter=D, volume=fp.volume, note=note,
        )
    return ConjectureBounds(
        family="dirichlet-nondegenerate", applicable=True,
        delta_e_inf=3.0 * PI**2 / (2.0 * d2), delta_mu_inf=3.0 * PI**2 / (2.0 * d2),
        diameter=D, volume=fp.volume,
    )


@dataclass
class ConjectureReport:
    family: str
    applicable: bool
    min_delta_e: float
    min_delta_mu: float
    margin_e: np.ndarray | None
    margin_mu: np.ndarray | None
    violations: list[dict]
    monotonicity_e: str
    monotonicity_mu: str
    note: str = ""


def _classify_monotone(values: np.ndarray, tol: float = MONOTONICITY_TOL) -> str:
    d = np.diff(values)
    if len(d) == 0:
        return "single-point"
    if np.all(d > tol):
        return "increasing"
    if np.all(d < -tol):
        return "decreasing"
    if np.all(np.abs(d) <= tol):
        return "constant"
    return "neither"


def check_conjecture(curve: GapCurve, bounds: ConjectureBounds,
                     tol: float = 0.0) -> ConjectureReport:
    """Margins of a gap curve against its bounds.

    The minimum is over the sampled betas only (a finite sample cannot
    certify the infimum). ``tol`` is the numerical slack: margins below
    ``-tol`` are listed as violations; the default 0 reports raw margins.
    """
    if len(curve) == 0:
        raise ValueError("empty gap curve")
    mono_e = _classify_monotone(curve.delta_e)
    mono_mu = _classify_monotone(curve.delta_mu)
    if not bounds.applicable:
        return ConjectureReport(
            family=bounds.family, applicable=False,
            min_delta_e=float(curve.delta_e.min()),
            min_delta_mu=float(curve.delta_mu.min()),
            margin_e=None, margin_mu=None, violations=[],
            monotonicity_e=mono_e, monotonicity_mu=mono_mu,
            note=bounds.note or "bounds not applicable",
        )
    margin_e = curve.delta_e - bounds.delta_e_inf
    margin_mu = curve.delta_mu - bounds.delta_mu_inf
    violations = []
    for i, b in enumerate(curve.betas):
        if margin_e[i] < -tol:
            violations.append({"beta": float(b), "gap": "delta_E",
                               "margin": float(margin_e[i])})
        if margin_mu[i] < -tol:
            violations.append({"beta": float(b), "gap": "delta_mu",
                               "margin": float(margin_mu[i])})
        se = bounds.stronger_delta_e(float(b))
        if se is not None and curve.delta_e[i] - se < -tol:
            violations.append({"beta": float(b), "gap": "delta_E(stronger)",
                               "margin": float(curve.delta_e[i] - se)})
        sm = bounds.stronger_delta_mu(float(b))
        if sm is not None and curve.delta_mu[i] - sm < -tol:
            violations.append({"beta": float(b), "gap": "delta_mu(stronger)",
                               "margin": float(curve.delta_mu[i] - sm)})
    return ConjectureReport(
        family=bounds.family, applicable=True,
        min_delta_e=float(curve.delta_e.min()),
        min_delta_mu=float(curve.delta_mu.min()),
        margin_e=margin_e, margin_mu=margin_mu, violations=violations,
        monotonicity_e=mono_e, monotonicity_mu=mono_mu,
        note=bounds.note,
    )


def fit_weak_decay_constant(curve: GapCurve, gamma_v: float,
                            beta_max: float = 1.0) -> tuple[float, bool]:
    """Whole-space degenerate check: fit C >= 0 with
    delta_E(beta) >= gamma_v - C beta on the weak window, and report whether
    the sampled tail decays. Returns (C, tail_decays)."""
    mask = curve.betas <= beta_max
    if mask.sum() >= 1:
        deficits = gamma_v - curve.delta_e[mask]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(curve.betas[mask] > 0, deficits / curve.betas[mask], 0.0)
        c_fit = float(max(0.0, ratios.max(initial=0.0)))
    else:
        c_fit = math.nan
    tail = bool(curve.delta_e[-1] < curve.delta_e[0]) if len(curve) > 1 else False
    return c_fit, tail


# ---------------------------------------------------------------------------
# Numeric vs closed forms
# ---------------------------------------------------------------------------


@dataclass
class ComparisonRow:
    beta: float
    quantity: str
    numeric: float
    asymptotic: float | None
    regime: str
    rel_diff: float | None  # None when no formula applies


@dataclass
class ComparisonTable:
    rows: list[ComparisonRow]
    slope_fit: dict | None = None  # logarithmic regimes only


def fit_log_slope(betas: np.ndarray, values: np.ndarray,
                  window: str = "upper-half") -> tuple[float, float]:
    """Least-squares slope of value vs ln(beta). The default window keeps the
    upper half of the sweep to reduce contamination from the O(1) term."""
    betas = np.asarray(betas, dtype=float)
    values = np.asarray(values, dtype=float)
    if window == "upper-half" and len(betas) >= 4:
        k = len(betas) // 2
        betas, values = betas[k:], values[k:]
    if len(betas) < 2:
        raise ValueError("need at least two points for a slope fit")
    A = np.vstack([np.ones_like(betas), np.log(betas)]).T
    coef, *_ = np.linalg.lstsq(A, values, rcond=None)
    return float(coef[1]), float(coef[0])


def _asymptotic_gaps(fp: ProblemFingerprint, beta: float) -> tuple[dict, str]:
    """Applicable closed-form gap values for one beta, with a regime label."""
    if fp.bc is BoundaryCondition.PERIODIC:
        _, gp = asymptotics.periodic_exact(fp.lengths, beta)
        return {"delta_E": gp.delta_e, "delta_mu": gp.delta_mu}, "exact"
    weak = beta <= asymptotics.WEAK_BETA_MAX
    if fp.bc is BoundaryCondition.NEUMANN:
        regime = "weak" if weak else "strong"
        try:
            _, gp = asymptotics.neumann_asym(fp.lengths, beta, fp.degenerate, regime)
        except ValueError:
            return {}, "unavailable"
        return {"delta_E": gp.delta_e, "delta_mu": gp.delta_mu}, regime
    if fp.bc is BoundaryCondition.TRUNCATED_WHOLE_SPACE:
        if fp.gammas is None:
            return {}, "unavailable"
        if weak:
            gp = asymptotics.harmonic_gap_weak(fp.gammas, beta, fp.degenerate)
            return {"delta_E": gp.delta_e, "delta_mu": gp.delta_mu}, "weak"
        if fp.degenerate:
            if len(fp.gammas) != 2:
                return {}, "unavailable"
            _, _, de, dmu = asymptotics.harmonic_degenerate_strong_2d(fp.gammas[0], beta)
            return {"delta_E": de, "delta_mu": dmu}, "strong-log"
        _, gp = asymptotics.harmonic_strong(fp.gammas, beta, higher_order=True)
        return {"delta_E": gp.delta_e, "delta_mu": gp.delta_mu}, "strong"
    # Dirichlet box; closed forms exist for the zero potential only
    if fp.potential_name != "zero" or fp.lengths is None:
        return {}, "unavailable"
    if fp.degenerate:
        if weak:
            gp = asymptotics.box_gap_degenerate_weak(fp.lengths, beta)
            return {"delta_E": gp.delta_e, "delta_mu": gp.delta_mu}, "weak"
        if len(fp.lengths) != 2:
            return {}, "unavailable"
        _, _, de, dmu = asymptotics.box_degenerate_strong_2d(fp.lengths[0], beta)
        return {"delta_E": de, "delta_mu": dmu}, "strong-log"
    if weak:
        gp = asymptotics.box_gap_weak_secondorder(fp.lengths, beta)
        return {"delta_E": gp.delta_e, "delta_mu": gp.delta_mu}, "weak2"
    gp = asymptotics.box_gap_strong(fp.lengths, beta)
    return {"delta_E": gp.delta_e, "delta_mu": gp.delta_mu}, "strong"


def compare_numeric_asymptotic(curve: GapCurve,
                               log_fit_window: str = "upper-half") -> ComparisonTable:
    """Per-beta relative differences between numeric gaps and the applicable
    closed forms. For logarithmic regimes (degenerate strong branches) a
    least-squares slope of delta_E against ln(beta) is fitted as well, since
    the closed form pins the slope but not the O(1) constant."""
    rows: list[ComparisonRow] = []
    log_regime = False
    for i, b in enumerate(curve.betas):
        vals, regime = _asymptotic_gaps(curve.fingerprint, float(b))
        log_regime = log_regime or regime == "strong-log"
        for qty, numeric in (("delta_E", curve.delta_e[i]), ("delta_mu", curve.delta_mu[i])):
            ref = vals.get(qty)
            rel = abs(numeric - ref) / abs(ref) if ref not in (None, 0.0) else None
            rows.append(ComparisonRow(
                beta=float(b), quantity=qty, numeric=float(numeric),
                asymptotic=None if ref is None else float(ref),
                regime=regime, rel_diff=rel,
            ))
    slope_fit = None
    if log_regime and len(curve) >= 2:
        strong = curve.betas > asymptotics.WEAK_BETA_MAX
        if strong.sum() >= 2:
            slope, intercept = fit_log_slope(
                curve.betas[strong], curve.delta_e[strong], window=log_fit_window
            )
            fp = curve.fingerprint
            if fp.bc is BoundaryCondition.TRUNCATED_WHOLE_SPACE:
                expected = None  # slope of delta_E vs ln(beta) is not constant here
            else:
                expected = PI / (2.0 * fp.lengths[0] ** 2)
            slope_fit = {"quantity": "delta_E", "slope": slope,
                         "intercept": intercept, "expected_slope": expected}
    return ComparisonTable(rows=rows, slope_fit=slope_fit)
