"""Computational domains, tensor grids, boundary conditions, quadrature,
and trapping potentials.

Grids are uniform tensor products over a rectangular box. The stored node
set depends on the boundary condition:

* Dirichlet: interior nodes only, spacing ``h = L/(n+1)``; boundary values
  are identically zero and never stored.
* Neumann: all nodes including both endpoints, ``h = L/(n-1)``; the
  discrete Laplacian uses ghost-point reflection.
* periodic: ``n`` nodes with wraparound neighbors, ``h = L/n``.

Quadrature is the composite trapezoidal rule adapted to each node set:
uniform weight ``h`` for Dirichlet (the boundary half-cells multiply the
implicit zeros) and periodic, endpoint weight ``h/2`` for Neumann.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

MIN_NODES_PER_DIM = 8
DEGENERACY_RTOL = 1e-12


class BoundaryCondition(Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    PERIODIC = "periodic"
    # Dirichlet on a truncation box chosen large enough to hold a decaying
    # whole-space state; the solver picks the box from the trap frequencies.
    TRUNCATED_WHOLE_SPACE = "truncated"

    @property
    def dirichlet_like(self) -> bool:
        return self in (BoundaryCondition.DIRICHLET, BoundaryCondition.TRUNCATED_WHOLE_SPACE)


@dataclass(frozen=True)
class BoxDomain:
    """Rectangular box ``prod_j (o_j, o_j + L_j)``.

    ``lengths`` are the positive side lengths; ``origin`` defaults to the
    zero corner. The convention used by the closed-form expansions orders
    the sides L1 >= L2 >= ... >= Ld; ``sorted_descending`` records whether
    this domain follows it.
    """

    lengths: tuple[float, ...]
    origin: tuple[float, ...] = ()

    def __post_init__(self):
        lengths = tuple(float(L) for L in self.lengths)
        if not 1 <= len(lengths) <= 3:
            raise ValueError(f"dimension must be 1, 2 or 3, got {len(lengths)}")
        if any(L <= 0 for L in lengths):
            raise ValueError(f"all side lengths must be positive, got {lengths}")
        origin = tuple(float(o) for o in self.origin) if self.origin else (0.0,) * len(lengths)
        if len(origin) != len(lengths):
            raise ValueError("origin and lengths dimensions differ")
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "origin", origin)

    @property
    def dim(self) -> int:
        return len(self.lengths)

    @property
    def volume(self) -> float:
        return math.prod(self.lengths)

    @property
    def sorted_descending(self) -> bool:
        return all(a >= b for a, b in zip(self.lengths, self.lengths[1:]))


def diameter(domain: BoxDomain) -> float:
    """Largest distance between two points of the box, sqrt(sum L_j^2)."""
    return math.sqrt(sum(L * L for L in domain.lengths))


def is_degenerate_lengths(lengths: Sequence[float], rtol: float = DEGENERACY_RTOL) -> bool:
    """True when the two largest sides coincide to relative tolerance ``rtol``.

    Equal leading sides make the second linear eigenvalue multiple, which
    switches the first excited branch from a real nodal state to a complex
    vortex state. The comparison tolerance is a policy knob; callers may
    override the classification explicitly.
    """
    if len(lengths) < 2:
        return False
    ls = sorted(lengths, reverse=True)
    return abs(ls[0] - ls[1]) <= rtol * abs(ls[0])


def is_degenerate_gammas(gammas: Sequence[float], rtol: float = DEGENERACY_RTOL) -> bool:
    """True when the two smallest trap frequencies coincide (see above)."""
    if len(gammas) < 2:
        return False
    gs = sorted(gammas)
    return abs(gs[0] - gs[1]) <= rtol * abs(gs[0])


# ---------------------------------------------------------------------------
# Potentials
# ---------------------------------------------------------------------------


class Potential:
    """Base class for trapping potentials V(x).

    ``convexity_modulus`` returns gamma_v > 0 with D^2 V >= gamma_v^2 I when
    the potential is convex with a known modulus, 0.0 for convex with zero
    modulus, and None when nonconvex or unknown.
    """

    name = "potential"

    def evaluate(self, coords: list[np.ndarray]) -> np.ndarray:
        raise NotImplementedError

    def convexity_modulus(self) -> float | None:
        return None

    def symmetric_in_axis(self, domain: BoxDomain, axis: int = 0) -> bool:
        """Whether V is invariant under mirroring ``axis`` about the box midline."""
        return False


@dataclass(frozen=True)
class ZeroPotential(Potential):
    name = "zero"

    def evaluate(self, coords):
        return np.zeros(np.broadcast_shapes(*(c.shape for c in coords)))

    def convexity_modulus(self):
        return 0.0

    def symmetric_in_axis(self, domain, axis=0):
        return True


@dataclass(frozen=True)
class HarmonicPotential(Potential):
    """V(x) = (1/2) sum_j gamma_j^2 x_j^2 with 0 < gamma_1 <= ... <= gamma_d."""

    gammas: tuple[float, ...]
    name = "harmonic"

    def __post_init__(self):
        gs = tuple(float(g) for g in self.gammas)
        if any(g <= 0 for g in gs):
            raise ValueError("trap frequencies must be positive")
        if any(a > b for a, b in zip(gs, gs[1:])):
            raise ValueError("trap frequencies must be sorted ascending")
        object.__setattr__(self, "gammas", gs)

    def evaluate(self, coords):
        if len(coords) != len(self.gammas):
            raise ValueError("potential/grid dimension mismatch")
        out = np.zeros(np.broadcast_shapes(*(c.shape for c in coords)))
        for g, x in zip(self.gammas, coords):
            out = out + 0.5 * g * g * x * x
        return out

    def convexity_modulus(self):
        return min(self.gammas)

    def symmetric_in_axis(self, domain, axis=0):
        # symmetric about x=0; needs the box centered on the origin
        lo = domain.origin[axis]
        return abs(lo + domain.lengths[axis] / 2.0) <= 1e-12 * max(1.0, domain.lengths[axis])


@dataclass(frozen=True)
class HarmonicPlusCosine(Potential):
    """1D V(x) = gamma^2 x^2 / 2 + v0 cos(k x)."""

    gamma: float
    v0: float
    k: float
    name = "harmonic+cosine"

    def evaluate(self, coords):
        if len(coords) != 1:
            raise ValueError("harmonic+cosine potential is one dimensional")
        x = coords[0]
        return 0.5 * self.gamma**2 * x * x + self.v0 * np.cos(self.k * x)

    def convexity_modulus(self):
        m2 = self.gamma**2 - abs(self.v0) * self.k**2
        return math.sqrt(m2) if m2 > 0 else None

    def symmetric_in_axis(self, domain, axis=0):
        lo = domain.origin[axis]
        return abs(lo + domain.lengths[axis] / 2.0) <= 1e-12 * max(1.0, domain.lengths[axis])


@dataclass(frozen=True)
class ShiftedQuadratic(Potential):
    """1D V(x) = v0 (x - center)^2."""

    v0: float
    center: float = 1.0
    name = "shifted-quadratic"

    def evaluate(self, coords):
        if len(coords) != 1:
            raise ValueError("shifted quadratic potential is one dimensional")
        return self.v0 * (coords[0] - self.center) ** 2

    def convexity_modulus(self):
        return math.sqrt(2.0 * self.v0) if self.v0 > 0 else None

    def symmetric_in_axis(self, domain, axis=0):
        mid = domain.origin[axis] + domain.lengths[axis] / 2.0
        return abs(self.center - mid) <= 1e-12 * max(1.0, domain.lengths[axis])


@dataclass(frozen=True)
class NonconvexDemo(Potential):
    """Nonconvex counterexample potentials on (0, 2).

    variant 'neg-quadratic': V(x) = -10 x^2
    variant 'sine':          V(x) = 10 sin(10 (x - 1))
    """

    variant: str
    name = "nonconvex"

    def __post_init__(self):
        if self.variant not in ("neg-quadratic", "sine"):
            raise ValueError(f"unknown nonconvex demo variant {self.variant!r}")

    def evaluate(self, coords):
        if len(coords) != 1:
            raise ValueError("nonconvex demo potentials are one dimensional")
        x = coords[0]
        if self.variant == "neg-quadratic":
            return -10.0 * x * x
        return 10.0 * np.sin(10.0 * (x - 1.0))

    def convexity_modulus(self):
        return None


@dataclass(frozen=True)
class TabulatedPotential(Potential):
    """Potential sampled on the grid nodes, one value per line in row-major
    order. Convexity is unknown unless the caller declares a modulus."""

    values: tuple[float, ...]
    shape: tuple[int, ...]
    declared_modulus: float | None = None
    name = "tabulated"

    @classmethod
    def from_text(cls, path, shape: Sequence[int], declared_modulus: float | None = None):
        raw = np.loadtxt(path, dtype=float).ravel()
        shape = tuple(int(m) for m in shape)
        if raw.size != math.prod(shape):
            raise ValueError(
                f"tabulated potential has {raw.size} values, grid needs {math.prod(shape)}"
            )
        return cls(tuple(raw.tolist()), shape, declared_modulus)

    def evaluate(self, coords):
        arr = np.asarray(self.values, dtype=float).reshape(self.shape)
        want = np.broadcast_shapes(*(c.shape for c in coords))
        if arr.shape != want:
            raise ValueError(f"tabulated shape {arr.shape} does not match grid {want}")
        return arr

    def convexity_modulus(self):
        return self.declared_modulus

    def symmetric_in_axis(self, domain, axis=0):
        arr = np.asarray(self.values, dtype=float).reshape(self.shape)
        return bool(np.allclose(arr, np.flip(arr, axis=axis), atol=1e-12))


# ---------------------------------------------------------------------------
# Grid
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid with BC tag, spacings and quadrature weights.

    Immutable after construction; safe to share across concurrent solves.
    """

    domain: BoxDomain
    bc: BoundaryCondition
    n: tuple[int, ...]
    h: tuple[float, ...]
    axes: tuple[np.ndarray, ...]
    _weight: np.ndarray = field(repr=False, default=None)

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n

    @property
    def size(self) -> int:
        return math.prod(self.n)

    @property
    def cell_volume(self) -> float:
        return math.prod(self.h)

    def coords(self) -> list[np.ndarray]:
        """Broadcastable node coordinate arrays, one per dimension."""
        return list(np.meshgrid(*self.axes, indexing="ij", sparse=True))

    def integrate(self, f: np.ndarray) -> float | complex:
        """Trapezoidal quadrature of a grid field over the domain."""
        return np.sum(self._weight * f)

    def norm(self, f: np.ndarray) -> float:
        """Discrete L2 norm sqrt(integral |f|^2)."""
        val = np.sum(self._weight * np.abs(f) ** 2)
        return float(np.sqrt(max(val.real, 0.0)))

    def laplacian(self, f: np.ndarray) -> np.ndarray:
        """Second-order centered discrete Laplacian with this grid's BC."""
        if f.shape != self.shape:
            raise ValueError(f"field shape {f.shape} does not match grid {self.shape}")
        out = np.zeros_like(f)
        for ax in range(self.dim):
            out += self._second_difference(f, ax) / self.h[ax] ** 2
        return out

    def _second_difference(self, f: np.ndarray, ax: int) -> np.ndarray:
        if self.bc is BoundaryCondition.PERIODIC:
            return np.roll(f, 1, axis=ax) + np.roll(f, -1, axis=ax) - 2.0 * f
        d = -2.0 * f
        lo = [slice(None)] * self.dim
        hi = [slice(None)] * self.dim
        lo[ax] = slice(None, -1)
        hi[ax] = slice(1, None)
        lo, hi = tuple(lo), tuple(hi)
        d[lo] = d[lo] + f[hi]
        d[hi] = d[hi] + f[lo]
        if self.bc is BoundaryCondition.NEUMANN:
            # ghost reflection: the missing neighbor beyond each endpoint is
            # the second node in from that endpoint
            first = [slice(None)] * self.dim
            second = [slice(None)] * self.dim
            first[ax] = 0
            second[ax] = 1
            d[tuple(first)] = d[tuple(first)] + f[tuple(second)]
            first[ax] = -1
            second[ax] = -2
            d[tuple(first)] = d[tuple(first)] + f[tuple(second)]
        # Dirichlet: missing neighbors are the zero boundary, nothing to add
        return d

    def mirror(self, f: np.ndarray, axis: int = 0) -> np.ndarray:
        """Field mirrored about the domain midline along ``axis``.

        All three node sets map onto themselves under the mirror: Dirichlet
        and Neumann nodes reverse, periodic nodes reverse up to the fixed
        node at the origin.
        """
        if self.bc is BoundaryCondition.PERIODIC:
            return np.roll(np.flip(f, axis=axis), 1, axis=axis)
        return np.flip(f, axis=axis)


def make_grid(domain: BoxDomain, n: Sequence[int] | int, bc: BoundaryCondition) -> Grid:
    """Build a grid with consistent neighbor maps and quadrature weights.

    ``n`` is the per-dimension stored node count (>= 8 so the first excited
    mode is representable). Dirichlet spacing is ``h = L/(n+1)``.
    """
    if isinstance(n, int):
        n = (n,) * domain.dim
    n = tuple(int(m) for m in n)
    if len(n) != domain.dim:
        raise ValueError(f"node counts {n} do not match dimension {domain.dim}")
    if any(m < MIN_NODES_PER_DIM for m in n):
        raise ValueError(f"need at least {MIN_NODES_PER_DIM} nodes per dimension, got {n}")

    axes = []
    hs = []
    for L, o, m in zip(domain.lengths, domain.origin, n):
        if bc.dirichlet_like:
            h = L / (m + 1)
            x = o + h * np.arange(1, m + 1)
        elif bc is BoundaryCondition.NEUMANN:
            h = L / (m - 1)
            x = o + h * np.arange(m)
        elif bc is BoundaryCondition.PERIODIC:
            h = L / m
            x = o + h * np.arange(m)
        else:  # pragma: no cover
            raise ValueError(f"unsupported boundary condition {bc}")
        hs.append(h)
        axes.append(x)

    cell = math.prod(hs)
    if bc is BoundaryCondition.NEUMANN:
        w = np.ones(n[0])
        w[0] = w[-1] = 0.5
        weight = w
        for m in n[1:]:
            w = np.ones(m)
            w[0] = w[-1] = 0.5
            weight = np.multiply.outer(weight, w)
        weight = weight * cell
    else:
        weight = np.full(n, cell)

    return Grid(domain=domain, bc=bc, n=n, h=tuple(hs), axes=tuple(axes), _weight=weight)


def eval_potential(pot: Potential, grid: Grid) -> np.ndarray:
    """Sample a potential on the grid nodes; every value must be finite."""
    vals = np.broadcast_to(pot.evaluate(grid.coords()), grid.shape).astype(float)
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"potential {pot.name!r} is not finite on the grid")
    return vals
