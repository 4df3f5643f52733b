"""Discretization containers and integral primitives for the two-level gas model.

Conventions used throughout the package:

* Velocity space is the cube [-L, L]^3 with a uniform Cartesian grid of
  N points per axis.  Fields over the grid are stored flat, shape (N^3,),
  in C order (index (ix*N + iy)*N + iz).  Integrals use the midpoint rule
  with cell volume (2L/(N-1))^3.
* The unit sphere carries total measure 1.  Fields over the sphere are
  vectors of nodal values for a fixed quadrature; integrals are plain
  weighted sums.
* Weighted moment norms: l1k(f) = integral of |f|(1+|v|^2)^(k/2) dv.

Grid axes are built so that the node set is exactly symmetric under
v -> -v in floating point, which downstream kernels rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GuardError",
    "Params",
    "VelocityGrid",
    "SphereQuadrature",
    "FullState",
    "ManifoldState",
    "Remainder",
    "sphere_design_32",
    "integrate_velocity",
    "integrate_sphere",
    "compose",
    "l1k_norm",
    "sphere_l1_norm",
    "state_norm",
    "remainder_norm",
    "zero_remainder",
]


class GuardError(ValueError):
    """A state left the region where the requested operation is defined.

    Raised when a trajectory escapes the balanced-manifold neighborhood or
    the photon fraction leaves [0, 1); distinct from generic numerical
    failures so drivers can map it to its own exit status.
    """


@dataclass(frozen=True)
class Params:
    """Physical constants and numerical tolerances for one model instance.

    eps0 is the internal energy gap of the excited species, c0_kernel the
    constant in front of the energy-transfer collision kernels, a0 and b0
    the spontaneous/stimulated radiative coefficients, eps_scale the small
    parameter of the stiff (fast radiation) system.
    """

    eps0: float = 0.5
    c0_kernel: float = 1.0
    a0: float = 1.0
    b0: float = 1.0
    eps_scale: float = 1e-2
    tol_newton: float = 1e-12
    tol_conservation: float = 1e-9

    def __post_init__(self) -> None:
        if not (self.eps0 > 0):
            raise ValueError(f"eps0 must be positive, got {self.eps0}")
        if not (self.c0_kernel > 0):
            raise ValueError(f"c0_kernel must be positive, got {self.c0_kernel}")
        if not (self.eps_scale > 0):
            raise ValueError(f"eps_scale must be positive, got {self.eps_scale}")
        if self.a0 < 0 or self.b0 < 0:
            raise ValueError(f"a0 and b0 must be nonnegative, got {self.a0}, {self.b0}")
        if not (self.tol_newton > 0 and self.tol_conservation > 0):
            raise ValueError("tolerances must be positive")


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


class VelocityGrid:
    """Uniform Cartesian grid on [-L, L]^3, exactly symmetric under v -> -v."""

    def __init__(self, n_per_axis: int, half_width: float) -> None:
        if n_per_axis < 2:
            raise ValueError(f"n_per_axis must be at least 2, got {n_per_axis}")
        if not (half_width > 0):
            raise ValueError(f"half_width must be positive, got {half_width}")
        n = int(n_per_axis)
        L = float(half_width)
        self.n_per_axis = n
        self.half_width = L
        self.spacing = 2.0 * L / (n - 1)
        self.cell_volume = self.spacing**3
        # (2k - (n-1)) is an exact integer, so axis[i] == -axis[n-1-i] bitwise.
        self.axis = _readonly((2 * np.arange(n) - (n - 1)) * L / (n - 1))
        xs, ys, zs = np.meshgrid(self.axis, self.axis, self.axis, indexing="ij")
        self.nodes = _readonly(np.stack([xs, ys, zs], axis=-1).reshape(-1, 3))
        self.r2 = _readonly(np.einsum("ij,ij->i", self.nodes, self.nodes))
        self._moment_weights: dict[int, np.ndarray] = {}

    @property
    def size(self) -> int:
        return self.n_per_axis**3

    def moment_weight(self, k: int) -> np.ndarray:
        """Nodal values of (1+|v|^2)^(k/2) for k in {0,...,4}."""
        if k not in (0, 1, 2, 3, 4):
            raise ValueError(f"weight exponent must be in 0..4, got {k}")
        if k not in self._moment_weights:
            if k == 0:
                w = np.ones(self.size)
            else:
                w = (1.0 + self.r2) ** (k / 2.0)
            self._moment_weights[k] = _readonly(w)
        return self._moment_weights[k]

    def __repr__(self) -> str:
        return f"VelocityGrid(n_per_axis={self.n_per_axis}, half_width={self.half_width})"


class SphereQuadrature:
    """Quadrature on the unit sphere with total measure normalized to 1."""

    def __init__(self, nodes: np.ndarray, weights: np.ndarray) -> None:
        nodes = np.array(nodes, dtype=np.float64)
        weights = np.array(weights, dtype=np.float64)
        if nodes.ndim != 2 or nodes.shape[1] != 3 or weights.shape != (nodes.shape[0],):
            raise ValueError("nodes must be (M, 3) and weights (M,)")
        norms = np.sqrt(np.einsum("ij,ij->i", nodes, nodes))
        if np.max(np.abs(norms - 1.0)) > 1e-12:
            raise ValueError("sphere nodes must have unit norm within 1e-12")
        if np.any(weights <= 0):
            raise ValueError("sphere weights must be positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("sphere weights must sum to 1 within 1e-12")
        self.nodes = _readonly(nodes)
        self.weights = _readonly(weights)
        self.antipodal_reps = self._find_antipodal_reps()

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    def _find_antipodal_reps(self) -> np.ndarray | None:
        """Indices picking one node per exact antipodal pair, or None.

        Pairing requires -node to be present bitwise and equal weights on
        the pair; the collision kernels use it to halve the angular loop.
        """
        index = {tuple(p): i for i, p in enumerate(self.nodes)}
        seen = np.zeros(self.size, dtype=bool)
        reps = []
        for i, p in enumerate(self.nodes):
            if seen[i]:
                continue
            j = index.get(tuple(-p))
            if j is None or j == i or seen[j]:
                return None
            if self.weights[i] != self.weights[j]:
                return None
            seen[i] = seen[j] = True
            reps.append(i)
        return np.array(reps, dtype=np.int64)


def sphere_design_32() -> SphereQuadrature:
    """Antipodally symmetric 32-node spherical design with equal weights.

    Union of the icosahedron (12) and dodecahedron (20) vertex sets, which
    integrates all polynomials up to degree 5 exactly; odd moments vanish
    by symmetry.  Nodes are interleaved so node 2k+1 is exactly -node 2k.
    """
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    ico = [
        (0.0, 1.0, phi),
        (0.0, -1.0, phi),
        (1.0, phi, 0.0),
        (-1.0, phi, 0.0),
        (phi, 0.0, 1.0),
        (phi, 0.0, -1.0),
    ]
    inv = 1.0 / phi
    dod = [
        (1.0, 1.0, 1.0),
        (1.0, 1.0, -1.0),
        (1.0, -1.0, 1.0),
        (1.0, -1.0, -1.0),
        (0.0, inv, phi),
        (0.0, -inv, phi),
        (inv, phi, 0.0),
        (-inv, phi, 0.0),
        (phi, 0.0, inv),
        (phi, 0.0, -inv),
    ]
    reps = []
    for p in ico + dod:
        v = np.array(p)
        reps.append(v / np.linalg.norm(v))
    nodes = np.empty((32, 3))
    nodes[0::2] = np.array(reps)
    nodes[1::2] = -nodes[0::2]
    weights = np.full(32, 1.0 / 32.0)
    return SphereQuadrature(nodes, weights)


def _as_field(values: np.ndarray, size: int, name: str) -> np.ndarray:
    a = np.array(values, dtype=np.float64)
    if a.shape != (size,):
        raise ValueError(f"{name} must have shape ({size},), got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return _readonly(a)


@dataclass(frozen=True)
class FullState:
    """Gas densities f1 (ground), f2 (excited) and photon density q.

    Physical states are nonnegative; solvers maintain that up to a floor
    and report violations rather than hiding them, so the constructor only
    insists on finiteness.
    """

    f1: np.ndarray
    f2: np.ndarray
    q: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "f1", _as_field(self.f1, np.size(self.f1), "f1"))
        object.__setattr__(self, "f2", _as_field(self.f2, np.size(self.f1), "f2"))
        object.__setattr__(self, "q", _as_field(self.q, np.size(self.q), "q"))

    def min_value(self) -> float:
        return float(min(self.f1.min(), self.f2.min(), self.q.min()))


@dataclass(frozen=True)
class ManifoldState:
    """Reduced state (lam, f): F1 = f, F2 = lam*f, Q = lam/(1-lam)."""

    lam: float
    f: np.ndarray

    def __post_init__(self) -> None:
        if not (0.0 <= self.lam < 1.0):
            raise ValueError(f"lam must lie in [0, 1), got {self.lam}")
        object.__setattr__(self, "f", _as_field(self.f, np.size(self.f), "f"))


@dataclass(frozen=True)
class Remainder:
    """Deviation (alpha, -alpha, theta) from a reduced state.

    The structural constraint (integral of alpha over v equals integral of
    theta over the sphere) involves grid and quadrature, so it is checked
    by the consumers that have them, not by this container.
    """

    alpha: np.ndarray
    theta: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", _as_field(self.alpha, np.size(self.alpha), "alpha"))
        object.__setattr__(self, "theta", _as_field(self.theta, np.size(self.theta), "theta"))


def zero_remainder(grid: VelocityGrid, quad: SphereQuadrature) -> Remainder:
    return Remainder(np.zeros(grid.size), np.zeros(quad.size))


def integrate_velocity(field: np.ndarray, grid: VelocityGrid, weight_exponent: int = 0) -> float:
    """Moment of a grid field: integral of field*(1+|v|^2)^(k/2) dv."""
    a = np.asarray(field, dtype=np.float64)
    if a.shape != (grid.size,):
        raise ValueError(f"field must have shape ({grid.size},), got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("field contains non-finite entries")
    return grid.cell_volume * float(a @ grid.moment_weight(weight_exponent))


def integrate_sphere(field: np.ndarray, quad: SphereQuadrature) -> float:
    """Integral of a sphere field against the normalized measure."""
    a = np.asarray(field, dtype=np.float64)
    if a.shape != (quad.size,):
        raise ValueError(f"field must have shape ({quad.size},), got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("field contains non-finite entries")
    return float(a @ quad.weights)


def compose(m: ManifoldState, w: Remainder) -> FullState:
    """Assemble the full state (f + alpha, lam*f - alpha, lam/(1-lam) + theta)."""
    if not (0.0 <= m.lam < 1.0):
        raise ValueError(f"lam must lie in [0, 1), got {m.lam}")
    if np.size(w.alpha) != np.size(m.f):
        raise ValueError("alpha and f live on different grids")
    q0 = m.lam / (1.0 - m.lam)
    return FullState(m.f + w.alpha, m.lam * m.f - w.alpha, q0 + w.theta)


def l1k_norm(field: np.ndarray, grid: VelocityGrid, k: int) -> float:
    """Weighted moment norm: integral of |field|(1+|v|^2)^(k/2) dv."""
    return integrate_velocity(np.abs(np.asarray(field, dtype=np.float64)), grid, k)


def sphere_l1_norm(field: np.ndarray, quad: SphereQuadrature) -> float:
    return integrate_sphere(np.abs(np.asarray(field, dtype=np.float64)), quad)


def state_norm(f1: np.ndarray, f2: np.ndarray, q: np.ndarray, grid: VelocityGrid, quad: SphereQuadrature) -> float:
    """Norm of a state triple: l12(f1) + l12(f2) + sphere l1 of q."""
    return l1k_norm(f1, grid, 2) + l1k_norm(f2, grid, 2) + sphere_l1_norm(q, quad)


def remainder_norm(w: Remainder, grid: VelocityGrid, quad: SphereQuadrature) -> float:
    """Norm of the deviation triple (alpha, -alpha, theta)."""
    return 2.0 * l1k_norm(w.alpha, grid, 2) + sphere_l1_norm(w.theta, quad)
