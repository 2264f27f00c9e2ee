"""Closed-form expansions for ground/first-excited energies, chemical
potentials, fundamental gaps, and the Thomas-Fermi / matched profiles.

Every function evaluates a printed formula exactly; nothing here is fitted
or numeric. Formulas come in regimes (weak interaction, strong interaction,
exact) and carry a validity guard; out-of-regime evaluation is flagged by
the tagged wrapper rather than silently extrapolated.

Conventions: box sides sorted descending L1 >= L2 >= ... >= Ld, trap
frequencies sorted ascending gamma_1 <= ... <= gamma_d, interaction
strength beta >= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from gpegap.domain import Grid, is_degenerate_gammas, is_degenerate_lengths

PI = math.pi

# strong-regime formulas are o(1) accurate for beta >> 1; below this guard
# the tagged wrapper marks the value as extrapolated
STRONG_BETA_MIN = 1.0
WEAK_BETA_MAX = 1.0


class Regime(Enum):
    WEAK = "weak"  # first order in beta
    WEAK_SECOND_ORDER = "weak2"  # gap through beta^2
    STRONG = "strong"  # o(1) remainder
    STRONG_LOG = "strong-log"  # log(beta) leading term, O(1) unknown
    EXACT = "exact"  # zero remainder


@dataclass(frozen=True)
class AsymptoticEstimate:
    name: str
    value: float
    regime: Regime
    note: str = ""
    extrapolated: bool = False


class StateEnergies(NamedTuple):
    e_g: float
    mu_g: float
    e_1: float
    mu_1: float


class GapPair(NamedTuple):
    delta_e: float
    delta_mu: float


# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------


def _check_lengths(lengths) -> tuple[float, ...]:
    ls = tuple(float(L) for L in lengths)
    if not 1 <= len(ls) <= 3 or any(L <= 0 for L in ls):
        raise ValueError(f"invalid box sides {lengths}")
    if any(a < b for a, b in zip(ls, ls[1:])):
        raise ValueError(f"box sides must be sorted descending, got {ls}")
    return ls


def _check_gammas(gammas) -> tuple[float, ...]:
    gs = tuple(float(g) for g in gammas)
    if not 1 <= len(gs) <= 3 or any(g <= 0 for g in gs):
        raise ValueError(f"invalid trap frequencies {gammas}")
    if any(a > b for a, b in zip(gs, gs[1:])):
        raise ValueError(f"trap frequencies must be sorted ascending, got {gs}")
    return gs


@dataclass(frozen=True)
class BoxConstants:
    """Combinations of the box sides entering the expansions.

    a0 = 1/sqrt(prod L_j)                       (peak of the flat state)
    a1 = (2/L1)(25/(9 L1) + (2/9) sum_j 1/L_j)
    a2 = (pi^2/2) sum_j 1/L_j^2                 (linear ground energy)
    a3 = sum_j 1/L_j
    a4 = 4 sum_{j<k} 1/(L_j L_k)                (0 when d = 1)
    a5 = a4 + 4 sum_{j>=2} 1/(L1 L_j)           (0 when d = 1)
    a6 = sum_j 1/L_j^2
    """

    lengths: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "lengths", _check_lengths(self.lengths))

    @property
    def d(self) -> int:
        return len(self.lengths)

    @property
    def a0(self) -> float:
        return 1.0 / math.sqrt(math.prod(self.lengths))

    @property
    def a1(self) -> float:
        L1 = self.lengths[0]
        return (2.0 / L1) * (25.0 / (9.0 * L1) + (2.0 / 9.0) * sum(1.0 / L for L in self.lengths))

    @property
    def a2(self) -> float:
        return 0.5 * PI**2 * sum(1.0 / L**2 for L in self.lengths)

    @property
    def a3(self) -> float:
        return sum(1.0 / L for L in self.lengths)

    @property
    def a4(self) -> float:
        if self.d < 2:
            return 0.0
        ls = self.lengths
        return 4.0 * sum(1.0 / (ls[j] * ls[k]) for j in range(self.d) for k in range(j + 1, self.d))

    @property
    def a5(self) -> float:
        if self.d < 2:
            return 0.0
        ls = self.lengths
        return self.a4 + 4.0 * sum(1.0 / (ls[0] * ls[j]) for j in range(1, self.d))

    @property
    def a6(self) -> float:
        return sum(1.0 / L**2 for L in self.lengths)

    def c_quartic(self, k1: int, k2: int, k3: int) -> float:
        """C_{k1,k2,k3}: second-order coupling sum for a 3D box."""
        if self.d != 3:
            raise ValueError("C_{k1,k2,k3} is defined for d = 3")
        ks = (k1, k2, k3)
        ls = self.lengths
        term1 = 81.0 * sum(L**2 / k**2 for L, k in zip(ls, ks))
        term2 = 9.0 * sum(
            1.0 / (ks[i] ** 2 / ls[i] ** 2 + ks[j] ** 2 / ls[j] ** 2)
            for i in range(3)
            for j in range(i + 1, 3)
        )
        term3 = 1.0 / sum(k**2 / L**2 for k, L in zip(ks, ls))
        return self.a0**4 * (term1 + term2 + term3)

    def gap_curvatures(self) -> GapPair:
        """Second-order-in-beta gap coefficients (G^(1), G^(2))."""
        if self.d == 1:
            g1 = 3.0 / (64.0 * PI**2)
            return GapPair(g1, 3.0 * g1)
        if self.d == 2:
            L1 = self.lengths[0]
            a6 = self.a6
            g1 = (self.a0**4 / (64.0 * PI**2)) * (
                27.0 / 4.0 * L1**2 + 3.0 / (a6 * (a6 * L1**2 + 3.0))
            )
            return GapPair(g1, 3.0 * g1)
        g1 = (self.c_quartic(1, 1, 1) - self.c_quartic(2, 1, 1)) / (256.0 * PI**2)
        return GapPair(g1, 3.0 * g1)


@dataclass(frozen=True)
class HarmonicConstants:
    """b0 = prod sqrt(gamma_j/2pi), b1 = sum gamma_j / 2, b2 = prod gamma_j,
    c_d = 2, pi, 4pi/3 for d = 1, 2, 3."""

    gammas: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "gammas", _check_gammas(self.gammas))

    @property
    def d(self) -> int:
        return len(self.gammas)

    @property
    def b0(self) -> float:
        return math.prod(math.sqrt(g / (2.0 * PI)) for g in self.gammas)

    @property
    def b1(self) -> float:
        return 0.5 * sum(self.gammas)

    @property
    def b2(self) -> float:
        return math.prod(self.gammas)

    @property
    def c_d(self) -> float:
        return {1: 2.0, 2: PI, 3: 4.0 * PI / 3.0}[self.d]


# ---------------------------------------------------------------------------
# Box potential (homogeneous Dirichlet)
# ---------------------------------------------------------------------------


def box_weak(lengths, beta: float, degenerate: bool = False) -> StateEnergies:
    """First order in beta, weakly repulsive regime.

    Ground state (all cases):
        E_g  = a2 + 3^d a0^2 / 2^(d+1) * beta
        mu_g = a2 + 3^d a0^2 / 2^d     * beta
    First excited, nondegenerate (d = 1 or L1 > L2): same slopes shifted by
    3 pi^2 / (2 L1^2). Degenerate (L1 = L2, d >= 2): the vortex combination
        E_1  = 3 pi^2/(2 L^2) + a2 + (13 d / 32) a0^2 beta
        mu_1 = 3 pi^2/(2 L^2) + a2 + (13 d / 16) a0^2 beta
    """
    c = BoxConstants(tuple(lengths))
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if degenerate and not is_degenerate_lengths(c.lengths):
        raise ValueError("degenerate=True requires L1 = L2")
    d = c.d
    slope_e = 3.0**d * c.a0**2 / 2.0 ** (d + 1)
    e_g = c.a2 + slope_e * beta
    mu_g = c.a2 + 2.0 * slope_e * beta
    shift = 3.0 * PI**2 / (2.0 * c.lengths[0] ** 2)
    if not degenerate:
        e_1 = shift + c.a2 + slope_e * beta
        mu_1 = shift + c.a2 + 2.0 * slope_e * beta
    else:
        e_1 = shift + c.a2 + (13.0 * d / 32.0) * c.a0**2 * beta
        mu_1 = shift + c.a2 + (13.0 * d / 16.0) * c.a0**2 * beta
    return StateEnergies(e_g, mu_g, e_1, mu_1)


def box_gap_weak_secondorder(lengths, beta: float) -> GapPair:
    """Nondegenerate weak-regime gaps through second order:
    delta = 3 pi^2/(2 L1^2) + G^(i) beta^2."""
    c = BoxConstants(tuple(lengths))
    if is_degenerate_lengths(c.lengths):
        raise ValueError("second-order weak gap applies to the nondegenerate case only")
    base = 3.0 * PI**2 / (2.0 * c.lengths[0] ** 2)
    g1, g2 = c.gap_curvatures()
    return GapPair(base + g1 * beta**2, base + g2 * beta**2)


def box_strong(lengths, beta: float) -> StateEnergies:
    """Strongly repulsive regime, o(1) remainders:

        E_g  = a0^2 beta/2 + (4 a0 a3/3) sqrt(beta) + 2 a3^2 - 8 a4/9
        mu_g = a0^2 beta + 2 a0 a3 sqrt(beta) + 2 a3^2 - a4
        E_1  = a0^2 beta/2 + (4 a0 q/(3 L1)) sqrt(beta) + 2 q^2/L1^2 - 8 a5/9
        mu_1 = a0^2 beta + (2 a0 q/L1) sqrt(beta) + 2 q^2/L1^2 - a5

    with q = a3 L1 + 1.
    """
    c = BoxConstants(tuple(lengths))
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    rb = math.sqrt(beta)
    L1 = c.lengths[0]
    q = c.a3 * L1 + 1.0
    e_g = 0.5 * c.a0**2 * beta + (4.0 * c.a0 * c.a3 / 3.0) * rb + 2.0 * c.a3**2 - 8.0 * c.a4 / 9.0
    mu_g = c.a0**2 * beta + 2.0 * c.a0 * c.a3 * rb + 2.0 * c.a3**2 - c.a4
    e_1 = (
        0.5 * c.a0**2 * beta
        + (4.0 * c.a0 * q / (3.0 * L1)) * rb
        + 2.0 * q**2 / L1**2
        - 8.0 * c.a5 / 9.0
    )
    mu_1 = c.a0**2 * beta + (2.0 * c.a0 * q / L1) * rb + 2.0 * q**2 / L1**2 - c.a5
    return StateEnergies(e_g, mu_g, e_1, mu_1)


def box_gap_strong(lengths, beta: float) -> GapPair:
    """Nondegenerate strong-regime gaps:
    delta_E = (4 a0/(3 L1)) sqrt(beta) + a1,  delta_mu = (2 a0/L1) sqrt(beta) + 6/L1^2."""
    c = BoxConstants(tuple(lengths))
    rb = math.sqrt(beta)
    L1 = c.lengths[0]
    return GapPair(
        (4.0 * c.a0 / (3.0 * L1)) * rb + c.a1,
        (2.0 * c.a0 / L1) * rb + 6.0 / L1**2,
    )


def box_gap_degenerate_weak(lengths, beta: float) -> GapPair:
    """Degenerate (L1 = L2, d >= 2) weak-regime gaps:
    delta_E = 3 pi^2/(2 L^2) - (5 d/32) a0^2 beta, delta_mu with twice the slope."""
    c = BoxConstants(tuple(lengths))
    if not is_degenerate_lengths(c.lengths) or c.d < 2:
        raise ValueError("degenerate weak gap requires L1 = L2 and d >= 2")
    base = 3.0 * PI**2 / (2.0 * c.lengths[0] ** 2)
    return GapPair(
        base - (5.0 * c.d / 32.0) * c.a0**2 * beta,
        base - (5.0 * c.d / 16.0) * c.a0**2 * beta,
    )


def box_degenerate_strong_2d(L: float, beta: float):
    """Degenerate 2D square, strong regime. The first excited branch is the
    winding-one vortex state:

        E_1  = beta/(2 L^2) + 8 sqrt(beta)/(3 L^2) + (pi/(2 L^2)) ln(beta)
        mu_1 = beta/L^2 + 4 sqrt(beta)/L^2 + (pi/(2 L^2)) ln(beta)

    Gaps carry only the logarithmic leading term; the O(1) constant is not
    determined. Returns (E_1, mu_1, delta_E, delta_mu).
    """
    if L <= 0 or beta <= 0:
        raise ValueError("need L > 0 and beta > 0")
    L2 = L * L
    logb = math.log(beta)
    e_1 = beta / (2.0 * L2) + 8.0 * math.sqrt(beta) / (3.0 * L2) + PI / (2.0 * L2) * logb
    mu_1 = beta / L2 + 4.0 * math.sqrt(beta) / L2 + PI / (2.0 * L2) * logb
    lead = PI / (2.0 * L2) * logb
    return e_1, mu_1, lead, lead


# ---------------------------------------------------------------------------
# Harmonic potential (whole space)
# ---------------------------------------------------------------------------


def harmonic_weak(gammas, beta: float, degenerate: bool = False) -> StateEnergies:
    """Weak regime via the linear (Hermite) states:

        E_g = b1 + b0 beta/2,  mu_g = b1 + b0 beta
    nondegenerate:  E_1 = gamma_1 + b1 + 3 b0 beta/8,  mu_1 = ... + 3 b0 beta/4
    degenerate:     E_1 = 3 gamma/2 + b0 d beta/8,     mu_1 = 3 gamma/2 + b0 d beta/4
    """
    c = HarmonicConstants(tuple(gammas))
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if degenerate and not is_degenerate_gammas(c.gammas):
        raise ValueError("degenerate=True requires gamma_1 = gamma_2")
    e_g = c.b1 + 0.5 * c.b0 * beta
    mu_g = c.b1 + c.b0 * beta
    if not degenerate:
        e_1 = c.gammas[0] + c.b1 + (3.0 / 8.0) * c.b0 * beta
        mu_1 = c.gammas[0] + c.b1 + (3.0 / 4.0) * c.b0 * beta
    else:
        g = c.gammas[0]
        e_1 = 1.5 * g + c.b0 * c.d / 8.0 * beta
        mu_1 = 1.5 * g + c.b0 * c.d / 4.0 * beta
    return StateEnergies(e_g, mu_g, e_1, mu_1)


def harmonic_gap_weak(gammas, beta: float, degenerate: bool = False) -> GapPair:
    """Weak-regime gaps: nondegenerate gamma_1 - b0 beta/8 (E) and
    gamma_1 - b0 beta/4 (mu); degenerate gamma - (4-d) b0 beta/8 and /4."""
    c = HarmonicConstants(tuple(gammas))
    g1 = c.gammas[0]
    if not degenerate:
        return GapPair(g1 - c.b0 * beta / 8.0, g1 - c.b0 * beta / 4.0)
    if not is_degenerate_gammas(c.gammas):
        raise ValueError("degenerate=True requires gamma_1 = gamma_2")
    return GapPair(
        g1 - (4.0 - c.d) * c.b0 * beta / 8.0,
        g1 - (4.0 - c.d) * c.b0 * beta / 4.0,
    )


def harmonic_mu_tf(gammas, beta: float) -> float:
    """Thomas-Fermi chemical potential mu_g^TF = ((d+2) b2 beta / c_d)^(2/(d+2)) / 2."""
    c = HarmonicConstants(tuple(gammas))
    if beta <= 0:
        raise ValueError("TF chemical potential needs beta > 0")
    return 0.5 * ((c.d + 2.0) * c.b2 * beta / c.c_d) ** (2.0 / (c.d + 2.0))


def harmonic_strong(gammas, beta: float, higher_order: bool = True):
    """Strong regime: mu_g = mu_g^TF, E_g = (2+d)/(4+d) mu_g^TF, and the
    first excited branch shifted by sqrt(2) gamma_1 / 2. With
    ``higher_order`` the gaps include the next-order correction

        delta_E  += gamma_1^2 (d+2)^(d/(d+2)) / 4 * (c_d/(b2 beta))^(2/(d+2))
        delta_mu += gamma_1^2 d (d+2)^(-2/(d+2)) / 4 * (c_d/(b2 beta))^(2/(d+2))

    Returns (StateEnergies, GapPair).
    """
    c = HarmonicConstants(tuple(gammas))
    mu_tf = harmonic_mu_tf(c.gammas, beta)
    d = c.d
    shift = math.sqrt(2.0) / 2.0 * c.gammas[0]
    e_g = (2.0 + d) / (4.0 + d) * mu_tf
    states = StateEnergies(e_g, mu_tf, e_g + shift, mu_tf + shift)
    de = dmu = shift
    if higher_order:
        g1 = c.gammas[0]
        scale = (c.c_d / (c.b2 * beta)) ** (2.0 / (d + 2.0))
        de += g1**2 * (d + 2.0) ** (d / (d + 2.0)) / 4.0 * scale
        dmu += g1**2 * d * (d + 2.0) ** (-2.0 / (d + 2.0)) / 4.0 * scale
    return states, GapPair(de, dmu)


def harmonic_degenerate_strong_2d(gamma: float, beta: float):
    """Degenerate 2D isotropic trap, strong regime (vortex branch):

        E_1  = E_g^TF + (gamma/2) sqrt(pi/beta) ln(beta)
        mu_1 = mu_g^TF + (gamma/4) sqrt(pi/beta) ln(beta)

    and the gaps equal the respective correction terms, both -> 0 as
    beta -> infinity. Returns (E_1, mu_1, delta_E, delta_mu).
    """
    if gamma <= 0 or beta <= 0:
        raise ValueError("need gamma > 0 and beta > 0")
    gs = (gamma, gamma)
    mu_tf = harmonic_mu_tf(gs, beta)
    e_tf = (2.0 + 2.0) / (4.0 + 2.0) * mu_tf
    corr = math.sqrt(PI / beta) * math.log(beta)
    de = 0.5 * gamma * corr
    dmu = 0.25 * gamma * corr
    return e_tf + de, mu_tf + dmu, de, dmu


# ---------------------------------------------------------------------------
# Periodic and Neumann boundary conditions (V = 0)
# ---------------------------------------------------------------------------


def periodic_exact(lengths, beta: float):
    """Exact values for every beta >= 0 (zero potential, periodic BC):
    the ground state is the flat state, the first excited state a plane
    wave, and both gaps equal 2 pi^2 / L1^2 independently of beta.
    Returns (StateEnergies, GapPair)."""
    c = BoxConstants(tuple(lengths))
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    gap = 2.0 * PI**2 / c.lengths[0] ** 2
    e_g = 0.5 * c.a0**2 * beta
    mu_g = c.a0**2 * beta
    return StateEnergies(e_g, mu_g, gap + e_g, gap + mu_g), GapPair(gap, gap)


def neumann_ground(lengths, beta: float) -> tuple[float, float]:
    """Exact Neumann ground values: the constant state, E_g = a0^2 beta/2,
    mu_g = a0^2 beta (a0 = 1/sqrt(|Omega|))."""
    c = BoxConstants(tuple(lengths))
    return 0.5 * c.a0**2 * beta, c.a0**2 * beta


def neumann_asym(lengths, beta: float, degenerate: bool = False, regime: str = "weak"):
    """Neumann box: exact ground values plus regime expansions for the
    first excited state and the gaps.

    regime 'weak' nondegenerate:
        E_1 = pi^2/(2 L1^2) + 3 a0^2 beta/4,     mu_1 = ... + 3 a0^2 beta/2
    regime 'strong' nondegenerate:
        E_1 = a0^2 beta/2 + (4 a0/(3 L1)) sqrt(beta) + 2/L1^2
        mu_1 = a0^2 beta + (2 a0/L1) sqrt(beta) + 2/L1^2
    degenerate weak: 5 a0^2 beta/8 and 5 a0^2 beta/4 slopes; degenerate
    strong (d = 2 only): logarithmic branch (pi/(2 L^2)) ln(beta).

    Returns (StateEnergies, GapPair).
    """
    c = BoxConstants(tuple(lengths))
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if degenerate and not is_degenerate_lengths(c.lengths):
        raise ValueError("degenerate=True requires L1 = L2")
    if regime not in ("weak", "strong"):
        raise ValueError(f"unknown regime {regime!r}")
    e_g, mu_g = neumann_ground(c.lengths, beta)
    L1 = c.lengths[0]
    a0 = c.a0
    if not degenerate:
        if regime == "weak":
            e_1 = PI**2 / (2.0 * L1**2) + 0.75 * a0**2 * beta
            mu_1 = PI**2 / (2.0 * L1**2) + 1.5 * a0**2 * beta
            gaps = GapPair(
                PI**2 / (2.0 * L1**2) + 0.25 * a0**2 * beta,
                PI**2 / (2.0 * L1**2) + 0.5 * a0**2 * beta,
            )
        else:
            rb = math.sqrt(beta)
            e_1 = 0.5 * a0**2 * beta + (4.0 * a0 / (3.0 * L1)) * rb + 2.0 / L1**2
            mu_1 = a0**2 * beta + (2.0 * a0 / L1) * rb + 2.0 / L1**2
            gaps = GapPair(
                (4.0 * a0 / (3.0 * L1)) * rb + 2.0 / L1**2,
                (2.0 * a0 / L1) * rb + 2.0 / L1**2,
            )
    else:
        L2sq = L1 * L1
        if regime == "weak":
            e_1 = PI**2 / (2.0 * L2sq) + (5.0 / 8.0) * a0**2 * beta
            mu_1 = PI**2 / (2.0 * L2sq) + (5.0 / 4.0) * a0**2 * beta
            gaps = GapPair(
                PI**2 / (2.0 * L2sq) + a0**2 * beta / 8.0,
                PI**2 / (2.0 * L2sq) + a0**2 * beta / 4.0,
            )
        else:
            if c.d != 2:
                raise ValueError("degenerate strong Neumann regime is available for d = 2 only")
            if beta <= 0:
                raise ValueError("strong regime needs beta > 0")
            logb = math.log(beta)
            e_1 = beta / (2.0 * L2sq) + PI / (2.0 * L2sq) * logb
            mu_1 = beta / L2sq + PI / (2.0 * L2sq) * logb
            lead = PI / (2.0 * L2sq) * logb
            gaps = GapPair(lead, lead)
    return StateEnergies(e_g, mu_g, e_1, mu_1), gaps


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------


def tf_layer_ground(x, L: float, mu: float):
    """1D matched ground profile factor on [0, L]:
    tanh(sqrt(mu) x) + tanh(sqrt(mu)(L - x)) - tanh(sqrt(mu) L)."""
    rm = np.sqrt(mu)
    return np.tanh(rm * x) + np.tanh(rm * (L - x)) - np.tanh(rm * L)


def tf_layer_excited(x, L: float, mu: float):
    """1D matched excited profile factor on [0, L]:
    tanh(sqrt(mu) x) - tanh(sqrt(mu)(L - x)) + tanh(sqrt(mu)(L/2 - x))."""
    rm = np.sqrt(mu)
    return np.tanh(rm * x) - np.tanh(rm * (L - x)) + np.tanh(rm * (L / 2.0 - x))


def vortex_core(r, mu: float):
    """Approximate vortex core amplitude f_a(r) = sqrt(2 mu r^2/(1 + 2 mu r^2))."""
    s = 2.0 * mu * np.asarray(r) ** 2
    return np.sqrt(s / (1.0 + s))


def harmonic_matched_excited(coords, gammas, mu: float, beta: float):
    """Matched excited profile for a harmonic trap (sign change across x1 = 0)."""
    gs = tuple(gammas)
    shape = np.broadcast_shapes(*(np.shape(c) for c in coords))
    v_all = sum(0.5 * g * g * np.asarray(c) ** 2 for g, c in zip(gs, coords))
    v_rest = sum((0.5 * g * g * np.asarray(c) ** 2 for g, c in zip(gs[1:], coords[1:])), 0.0)
    g1 = np.broadcast_to(mu - v_all, shape)
    g2 = np.broadcast_to(mu - v_rest, shape)
    x1 = np.broadcast_to(coords[0], shape)
    sup = g1 >= 0.0
    rg1 = np.sqrt(np.where(sup, g1, 0.0) / beta)
    g2pos = np.where(g2 > 0.0, g2, 0.0)
    rg2 = np.sqrt(g2pos / beta)
    layer = np.tanh(x1 * np.sqrt(g2pos))
    out = np.zeros(shape)
    pos = sup & (x1 >= 0.0)
    neg = sup & (x1 < 0.0)
    out[pos] = rg1[pos] + rg2[pos] * (layer[pos] - 1.0)
    out[neg] = -rg1[neg] + rg2[neg] * (1.0 + layer[neg])
    return out


PROFILE_KINDS = (
    "box-linear-ground",
    "box-linear-excited",
    "box-ma-ground",
    "box-ma-excited",
    "harmonic-linear-ground",
    "harmonic-linear-excited",
    "harmonic-tf-ground",
    "harmonic-ma-excited",
    "vortex-seed",
    "box-degenerate-density",
    "harmonic-degenerate-density",
)


def profile(kind: str, grid: Grid, *, mu: float | None = None, beta: float | None = None,
            gammas=None, center=None):
    """Sample a closed-form profile on a grid.

    Returns ``(normalized, raw)``: the raw formula values and the same field
    normalized (unit L2 norm for amplitudes, unit mass for the two density
    kinds). Box profiles use the grid's own side lengths; harmonic profiles
    need ``gammas`` and coordinates centered on the trap.
    """
    if kind not in PROFILE_KINDS:
        raise ValueError(f"unknown profile kind {kind!r}")
    coords = grid.coords()
    ls = grid.domain.lengths
    org = grid.domain.origin
    xi = [c - o for c, o in zip(coords, org)]  # box coordinates in (0, L)

    if kind == "box-linear-ground":
        a0 = 1.0 / math.sqrt(math.prod(ls))
        raw = 2.0 ** (grid.dim / 2.0) * a0 * np.ones(grid.shape)
        for x, L in zip(xi, ls):
            raw = raw * np.sin(PI * x / L)
    elif kind == "box-linear-excited":
        a0 = 1.0 / math.sqrt(math.prod(ls))
        raw = 2.0 ** (grid.dim / 2.0) * a0 * np.sin(2.0 * PI * xi[0] / ls[0])
        for x, L in zip(xi[1:], ls[1:]):
            raw = raw * np.sin(PI * x / L)
        raw = raw * np.ones(grid.shape)
    elif kind == "box-ma-ground":
        _need(mu=mu, beta=beta)
        raw = math.sqrt(mu / beta) * np.ones(grid.shape)
        for x, L in zip(xi, ls):
            raw = raw * tf_layer_ground(x, L, mu)
    elif kind == "box-ma-excited":
        _need(mu=mu, beta=beta)
        raw = math.sqrt(mu / beta) * tf_layer_excited(xi[0], ls[0], mu)
        for x, L in zip(xi[1:], ls[1:]):
            raw = raw * tf_layer_ground(x, L, mu)
        raw = raw * np.ones(grid.shape)
    elif kind == "harmonic-linear-ground":
        _need(gammas=gammas)
        raw = np.ones(grid.shape)
        for g, x in zip(gammas, coords):
            raw = raw * (g / PI) ** 0.25 * np.exp(-0.5 * g * x * x)
    elif kind == "harmonic-linear-excited":
        _need(gammas=gammas)
        raw = math.sqrt(2.0 * gammas[0]) * coords[0] * np.ones(grid.shape)
        for g, x in zip(gammas, coords):
            raw = raw * (g / PI) ** 0.25 * np.exp(-0.5 * g * x * x)
    elif kind == "harmonic-tf-ground":
        _need(gammas=gammas, mu=mu, beta=beta)
        v = sum(0.5 * g * g * np.asarray(x) ** 2 for g, x in zip(gammas, coords))
        raw = np.sqrt(np.maximum(mu - v, 0.0) / beta) * np.ones(grid.shape)
    elif kind == "harmonic-ma-excited":
        _need(gammas=gammas, mu=mu, beta=beta)
        raw = harmonic_matched_excited(coords, gammas, mu, beta) * np.ones(grid.shape)
    elif kind == "vortex-seed":
        _need(mu=mu)
        if grid.dim < 2:
            raise ValueError("vortex profiles need d >= 2")
        c = center if center is not None else _domain_center(grid)
        r = np.sqrt((coords[0] - c[0]) ** 2 + (coords[1] - c[1]) ** 2)
        raw = vortex_core(r, mu) * np.ones(grid.shape)
    elif kind == "box-degenerate-density":
        _need(mu=mu, beta=beta)
        if grid.dim != 2:
            raise ValueError("the matched vortex density is a 2D formula")
        c = center if center is not None else _domain_center(grid)
        r = np.sqrt((coords[0] - c[0]) ** 2 + (coords[1] - c[1]) ** 2)
        outer = tf_layer_ground(xi[0], ls[0], mu) * tf_layer_ground(xi[1], ls[1], mu)
        raw = math.sqrt(mu / beta) * (vortex_core(r, mu) ** 2 + outer**2 - 1.0)
    else:  # harmonic-degenerate-density
        _need(gammas=gammas, mu=mu, beta=beta)
        if grid.dim != 2:
            raise ValueError("the matched vortex density is a 2D formula")
        g = gammas[0]
        c = center if center is not None else (0.0, 0.0)
        r2 = (coords[0] - c[0]) ** 2 + (coords[1] - c[1]) ** 2
        raw = (2.0 * mu * r2 / (1.0 + 2.0 * mu * r2)) * np.maximum(
            2.0 * mu - g * g * r2, 0.0
        ) / (2.0 * beta)
        raw = raw * np.ones(grid.shape)

    if kind.endswith("density"):
        mass = float(np.real(grid.integrate(raw)))
        if mass <= 0:
            raise ValueError(f"profile {kind!r} has nonpositive mass on this grid")
        return raw / mass, raw
    nrm = grid.norm(raw)
    if nrm <= 0:
        raise ValueError(f"profile {kind!r} vanishes on this grid")
    return raw / nrm, raw


def _need(**kwargs):
    missing = [k for k, v in kwargs.items() if v is None]
    if missing:
        raise ValueError(f"profile parameters missing: {', '.join(missing)}")


def _domain_center(grid: Grid):
    return tuple(o + L / 2.0 for o, L in zip(grid.domain.origin, grid.domain.lengths))


# ---------------------------------------------------------------------------
# Tagged evaluation (used by the CLI and comparison reports)
# ---------------------------------------------------------------------------


def estimate_table(kind: str, *, beta: float, lengths=None, gammas=None,
                   degenerate: bool | None = None, regime: str = "auto",
                   higher_order: bool = False) -> list[AsymptoticEstimate]:
    """Regime-tagged values for one problem class at one beta.

    ``kind`` is one of 'box', 'harmonic', 'periodic', 'neumann'. ``regime``
    'weak'/'strong'/'exact' selects a branch, 'auto' picks weak for
    beta <= 1, strong otherwise (periodic is always exact). Values whose
    regime guard fails are returned with ``extrapolated=True`` rather than
    silently dropped.
    """
    rows: list[AsymptoticEstimate] = []

    def add(name, value, rg, note="", extrap=False):
        rows.append(AsymptoticEstimate(name, float(value), rg, note, extrap))

    if kind == "periodic":
        st, gp = periodic_exact(lengths, beta)
        for nm, v in zip(("E_g", "mu_g", "E_1", "mu_1", "delta_E", "delta_mu"), (*st, *gp)):
            add(nm, v, Regime.EXACT, "exact for all beta")
        return rows

    if regime == "auto":
        regime = "weak" if beta <= WEAK_BETA_MAX else "strong"

    if kind == "box":
        deg = is_degenerate_lengths(lengths) if degenerate is None else degenerate
        if regime == "weak":
            extrap = beta > WEAK_BETA_MAX
            st = box_weak(lengths, beta, degenerate=deg)
            for nm, v in zip(("E_g", "mu_g", "E_1", "mu_1"), st):
                add(nm, v, Regime.WEAK, "o(beta) remainder", extrap)
            if deg:
                gp = box_gap_degenerate_weak(lengths, beta)
                add("delta_E", gp.delta_e, Regime.WEAK, "o(beta) remainder", extrap)
                add("delta_mu", gp.delta_mu, Regime.WEAK, "o(beta) remainder", extrap)
            else:
                gp = box_gap_weak_secondorder(lengths, beta)
                add("delta_E", gp.delta_e, Regime.WEAK_SECOND_ORDER, "o(beta^2) remainder", extrap)
                add("delta_mu", gp.delta_mu, Regime.WEAK_SECOND_ORDER, "o(beta^2) remainder", extrap)
        else:
            extrap = beta < STRONG_BETA_MIN
            if deg:
                if len(lengths) != 2:
                    raise ValueError("degenerate strong box formulas are 2D only")
                st_g = box_strong(lengths, beta)
                e1, m1, de, dmu = box_degenerate_strong_2d(lengths[0], beta)
                add("E_g", st_g.e_g, Regime.STRONG, "o(1) remainder", extrap)
                add("mu_g", st_g.mu_g, Regime.STRONG, "o(1) remainder", extrap)
                add("E_1", e1, Regime.STRONG_LOG, "o(ln beta) remainder", extrap)
                add("mu_1", m1, Regime.STRONG_LOG, "o(ln beta) remainder", extrap)
                add("delta_E", de, Regime.STRONG_LOG, "leading term only, O(1) unknown", extrap)
                add("delta_mu", dmu, Regime.STRONG_LOG, "leading term only, O(1) unknown", extrap)
            else:
                st = box_strong(lengths, beta)
                gp = box_gap_strong(lengths, beta)
                for nm, v in zip(("E_g", "mu_g", "E_1", "mu_1"), st):
                    add(nm, v, Regime.STRONG, "o(1) remainder", extrap)
                add("delta_E", gp.delta_e, Regime.STRONG, "o(1) remainder", extrap)
                add("delta_mu", gp.delta_mu, Regime.STRONG, "o(1) remainder", extrap)
        return rows

    if kind == "harmonic":
        deg = is_degenerate_gammas(gammas) if degenerate is None else degenerate
        if regime == "weak":
            extrap = beta > WEAK_BETA_MAX
            st = harmonic_weak(gammas, beta, degenerate=deg)
            gp = harmonic_gap_weak(gammas, beta, degenerate=deg)
            for nm, v in zip(("E_g", "mu_g", "E_1", "mu_1", "delta_E", "delta_mu"), (*st, *gp)):
                add(nm, v, Regime.WEAK, "o(beta) remainder", extrap)
        else:
            extrap = beta < STRONG_BETA_MIN
            if deg:
                if len(gammas) != 2:
                    raise ValueError("degenerate strong harmonic formulas are 2D only")
                st_g, _ = harmonic_strong(gammas, beta, higher_order=False)
                e1, m1, de, dmu = harmonic_degenerate_strong_2d(gammas[0], beta)
                add("E_g", st_g.e_g, Regime.STRONG, "o(1) remainder", extrap)
                add("mu_g", st_g.mu_g, Regime.STRONG, "TF value", extrap)
                add("E_1", e1, Regime.STRONG_LOG, "O(beta^-1/2) remainder", extrap)
                add("mu_1", m1, Regime.STRONG_LOG, "O(beta^-1/2) remainder", extrap)
                add("delta_E", de, Regime.STRONG_LOG, "-> 0 as beta -> inf", extrap)
                add("delta_mu", dmu, Regime.STRONG_LOG, "-> 0 as beta -> inf", extrap)
            else:
                st, gp = harmonic_strong(gammas, beta, higher_order=higher_order)
                note = "o(1) remainder" + (", next-order gap correction" if higher_order else "")
                for nm, v in zip(("E_g", "mu_g", "E_1", "mu_1", "delta_E", "delta_mu"), (*st, *gp)):
                    add(nm, v, Regime.STRONG, note, extrap)
        return rows

    if kind == "neumann":
        deg = is_degenerate_lengths(lengths) if degenerate is None else degenerate
        extrap = (regime == "strong" and beta < STRONG_BETA_MIN) or (
            regime == "weak" and beta > WEAK_BETA_MAX
        )
        st, gp = neumann_asym(lengths, beta, degenerate=deg, regime=regime)
        add("E_g", st.e_g, Regime.EXACT, "constant state, exact")
        add("mu_g", st.mu_g, Regime.EXACT, "constant state, exact")
        rg = Regime.STRONG_LOG if (deg and regime == "strong") else (
            Regime.WEAK if regime == "weak" else Regime.STRONG
        )
        add("E_1", st.e_1, rg, "", extrap)
        add("mu_1", st.mu_1, rg, "", extrap)
        add("delta_E", gp.delta_e, rg, "", extrap)
        add("delta_mu", gp.delta_mu, rg, "", extrap)
        return rows

    raise ValueError(f"unknown problem kind {kind!r}")
