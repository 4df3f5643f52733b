"""Binary collision operators for the two-species gas.

Three channels act on the pair of velocity densities (f1, f2):

* elastic scattering within and across species, kernel |v - v*|, which
  rotates the relative velocity: v' = c + |d|/2 w, v*' = c - |d|/2 w;
* endothermic transfer 1+1 -> 2+1, kernel c0 sqrt(|d|^2 - 4 eps0)/2 on
  the open channel |d|^2 > 4 eps0, which stores 2 eps0 of kinetic energy
  as internal energy;
* exothermic transfer 2+1 -> 1+1, kernel c0 sqrt(|d|^2 + 4 eps0)/2,
  which releases that energy back.

eval_K evaluates the strong (gather) form on the grid: for each velocity
pair the post-collision sphere is sampled by an antipodal quadrature and
the densities are interpolated trilinearly.  weak_moment evaluates the
symmetrized weak form against quadratic test functions, sampling the
densities only at grid nodes and the test functions exactly at the
transformed velocities; pairs of test functions that are collision
invariants therefore telescope to zero up to roundoff.
conservative_correction projects an increment back onto the exact
discrete conservation laws (mass, momentum, total energy including the
2 eps0 internal contribution) with the smallest possible L2 change.

Pairs whose velocities both lie far outside the support of the state
contribute below roundoff; a radial envelope bound detects and skips
them.  The bound is a pure function of the state, so results remain
deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import BACKEND, kernels
from .core import FullState, Params, SphereQuadrature, VelocityGrid

_SUPPORT_TAU = 1e-10
_ENV_BINS = 128
_POLY_BATCH = 16


@dataclass(frozen=True)
class QuadraticWeight:
    """Test function a + b.v + c|v|^2 on velocity space."""

    const: float = 0.0
    lin: tuple[float, float, float] = (0.0, 0.0, 0.0)
    quad: float = 0.0

    def coeffs(self) -> np.ndarray:
        """Coefficient vector [a, bx, by, bz, c]."""
        return np.array([self.const, *self.lin, self.quad], dtype=float)

    def at(self, v: np.ndarray) -> np.ndarray:
        """Evaluate at velocities v with shape (..., 3)."""
        v = np.asarray(v, dtype=float)
        rr = np.einsum("...d,...d->...", v, v)
        return self.const + v @ np.asarray(self.lin, dtype=float) + self.quad * rr

    @classmethod
    def one(cls) -> "QuadraticWeight":
        return cls(const=1.0)

    @classmethod
    def zero(cls) -> "QuadraticWeight":
        return cls()

    @classmethod
    def component(cls, axis: int) -> "QuadraticWeight":
        lin = [0.0, 0.0, 0.0]
        lin[axis] = 1.0
        return cls(lin=tuple(lin))

    @classmethod
    def energy(cls, shift: float = 0.0) -> "QuadraticWeight":
        return cls(const=shift, quad=1.0)


def invariant_pairs(params: Params) -> list[tuple[QuadraticWeight, QuadraticWeight]]:
    """The five (phi1, phi2) pairs conserved by the collision operators."""
    w = QuadraticWeight
    return [
        (w.one(), w.one()),
        (w.component(0), w.component(0)),
        (w.component(1), w.component(1)),
        (w.component(2), w.component(2)),
        (w.energy(), w.energy(shift=2.0 * params.eps0)),
    ]


def transfer_pair() -> tuple[QuadraticWeight, QuadraticWeight]:
    """(1, 0): the weak moment equal to the net species-1 gain rate."""
    return QuadraticWeight.one(), QuadraticWeight.zero()


@dataclass(frozen=True)
class CollisionIncrement:
    """Collision rates (d/dt f1, d/dt f2) on the grid."""

    d_f1: np.ndarray
    d_f2: np.ndarray
    correction_norm: float = 0.0


def _support_bound(f1: np.ndarray, f2: np.ndarray, grid: VelocityGrid,
                   eps0: float) -> tuple[np.ndarray, float]:
    """Indices that can contribute and the bound on r2[i]+r2[j] per pair.

    A pair is negligible when every gain or loss product it generates is
    below _SUPPORT_TAU relative to the squared peak density.  The radial
    envelope of max(|f1|, |f2|) bounds the products through the identity
    |p+|^2 + |p-|^2 = |v_i|^2 + |v_j|^2 + shift, with the shift -2 eps0
    for the endothermic gain (the binding case) and a stencil margin for
    the interpolation reach.
    """
    mag = np.maximum(np.abs(f1), np.abs(f2))
    peak = float(mag.max(initial=0.0))
    if peak <= 0.0:
        return np.empty(0, dtype=np.int64), -1.0
    r2 = grid.r2
    r2max = float(r2.max())
    if r2max <= 0.0:
        return np.arange(grid.size, dtype=np.int64), float("inf")
    bins = np.minimum((r2 * (_ENV_BINS / r2max)).astype(np.int64), _ENV_BINS - 1)
    env = np.zeros(_ENV_BINS)
    np.maximum.at(env, bins, mag)
    hi = np.arange(1, _ENV_BINS + 1) * (r2max / _ENV_BINS)
    thresh = _SUPPORT_TAU * peak * peak
    s_raw = -1.0
    for b1 in range(_ENV_BINS):
        if env[b1] <= 0.0:
            continue
        need = thresh / env[b1]
        partners = np.nonzero(env >= need)[0]
        if partners.size == 0:
            continue
        cand = hi[b1] + hi[partners[-1]]
        if cand > s_raw:
            s_raw = cand
    if s_raw < 0.0:
        return np.empty(0, dtype=np.int64), -1.0
    h = grid.spacing
    y = np.sqrt(6.0) * h + np.sqrt(s_raw + 9.0 * h * h)
    s_pair_max = 2.0 * eps0 + y * y
    ball = np.nonzero(r2 <= s_pair_max)[0].astype(np.int64)
    return ball, s_pair_max


def _quad_reps(quad: SphereQuadrature) -> tuple[np.ndarray, np.ndarray]:
    reps = quad.antipodal_reps
    if reps is None:
        raise ValueError("sphere quadrature must pair antipodal nodes")
    return (np.ascontiguousarray(quad.nodes[reps]),
            np.ascontiguousarray(quad.weights[reps]))


def _cutoff_value(cutoff_n) -> float:
    if cutoff_n is None:
        return -1.0
    value = float(cutoff_n)
    if not np.isfinite(value) or value <= 0.0:
        raise ValueError("cutoff_n must be positive")
    return value


def eval_K(state: FullState, grid: VelocityGrid, quad: SphereQuadrature,
           params: Params, cutoff_n=None, threads: int = 1) -> CollisionIncrement:
    """Strong-form collision rates for both species."""
    if state.f1.shape[0] != grid.size:
        raise ValueError("state does not match grid")
    om, ow = _quad_reps(quad)
    cut = _cutoff_value(cutoff_n)
    ball, s_pair_max = _support_bound(state.f1, state.f2, grid, params.eps0)
    k1, k2 = kernels.eval_k_core(
        state.f1, state.f2, grid.nodes, grid.r2, ball, om, ow,
        1.0 / grid.spacing, grid.half_width, grid.n_per_axis,
        params.eps0, params.c0_kernel, cut,
        s_pair_max, grid.cell_volume, int(threads))
    for name, arr in (("species 1", k1), ("species 2", k2)):
        bad = np.nonzero(~np.isfinite(arr))[0]
        if bad.size:
            raise ValueError(
                f"non-finite collision rate for {name} at node index {int(bad[0])}")
    return CollisionIncrement(d_f1=k1, d_f2=k2)


def weak_moment_multi(state: FullState, grid: VelocityGrid,
                      quad: SphereQuadrature, params: Params,
                      pairs: list[tuple[QuadraticWeight, QuadraticWeight]],
                      cutoff_n=None, threads: int = 1) -> np.ndarray:
    """Weak moments of the collision operators for several test pairs."""
    if state.f1.shape[0] != grid.size:
        raise ValueError("state does not match grid")
    om, ow = _quad_reps(quad)
    cut = _cutoff_value(cutoff_n)
    ball, s_pair_max = _support_bound(state.f1, state.f2, grid, params.eps0)
    out = np.empty(len(pairs))
    for start in range(0, len(pairs), _POLY_BATCH):
        batch = pairs[start:start + _POLY_BATCH]
        polys = np.ascontiguousarray(
            [np.concatenate([p1.coeffs(), p2.coeffs()]) for p1, p2 in batch])
        out[start:start + len(batch)] = kernels.weak_core(
            state.f1, state.f2, grid.nodes, grid.r2, ball, om, ow,
            1.0 / grid.spacing, grid.half_width, grid.n_per_axis,
            params.eps0, params.c0_kernel, cut,
            s_pair_max, grid.cell_volume, polys, int(threads))
    return out


def weak_moment(state: FullState, grid: VelocityGrid, quad: SphereQuadrature,
                params: Params, phi1: QuadraticWeight, phi2: QuadraticWeight,
                cutoff_n=None, threads: int = 1) -> float:
    """Weak moment of the collision operators against one test pair."""
    return float(weak_moment_multi(state, grid, quad, params, [(phi1, phi2)],
                                   cutoff_n=cutoff_n, threads=threads)[0])


_ROWS_CACHE: dict = {}


def _constraint_rows(grid: VelocityGrid, eps0: float):
    """Rows of the five conservation constraints and their Gram matrix."""
    key = (grid.n_per_axis, grid.half_width, float(eps0))
    hit = _ROWS_CACHE.get(key)
    if hit is not None:
        return hit
    n3 = grid.size
    rows = np.empty((5, 2 * n3))
    ones = np.ones(n3)
    rows[0, :n3] = ones
    rows[0, n3:] = ones
    for axis in range(3):
        rows[1 + axis, :n3] = grid.nodes[:, axis]
        rows[1 + axis, n3:] = grid.nodes[:, axis]
    rows[4, :n3] = grid.r2
    rows[4, n3:] = grid.r2 + 2.0 * eps0
    rows *= grid.cell_volume
    gram = rows @ rows.T
    _ROWS_CACHE[key] = (rows, gram)
    return rows, gram


def conservative_correction(inc: CollisionIncrement, grid: VelocityGrid,
                            params: Params) -> CollisionIncrement:
    """Smallest weighted-L2 change of an increment restoring exact
    conservation.

    The perturbation minimizes sum(pert^2 / |inc|) subject to the five
    invariant constraints, so each cell is corrected in proportion to
    the activity the operator actually placed there.  Cells the
    operator never touched stay exactly zero (compact supports survive,
    vacuum collects no correction dust), and a cell receiving only a
    positive gain is nudged by a small fraction of that gain, never
    below zero.  If the weighted system degenerates, the correction
    falls back to the uniform-weight minimal-L2 form over all cells.
    """
    rows, gram = _constraint_rows(grid, params.eps0)
    n3 = grid.size
    stacked = np.concatenate([inc.d_f1, inc.d_f2])
    resid = rows @ stacked
    if not np.any(resid):
        return inc
    weight = np.abs(stacked)
    gram_w = (rows * weight) @ rows.T
    pert = None
    try:
        cand = -weight * (rows.T @ np.linalg.solve(gram_w, resid))
        # two refinement passes mop up conditioning error
        for _ in range(2):
            left = resid + rows @ cand
            cand -= weight * (rows.T @ np.linalg.solve(gram_w, left))
        left = resid + rows @ cand
    except np.linalg.LinAlgError:
        cand, left = None, None
    scale = float(np.abs(resid).max())
    if cand is not None and np.isfinite(cand).all() and (
            float(np.abs(left).max()) <= 1e-12 * max(1.0, scale)):
        pert = cand
    if pert is None:
        pert = -(rows.T @ np.linalg.solve(gram, resid))
    return CollisionIncrement(
        d_f1=inc.d_f1 + pert[:n3],
        d_f2=inc.d_f2 + pert[n3:],
        correction_norm=float(np.linalg.norm(pert)))


def truncation_fraction(state: FullState, grid: VelocityGrid,
                        params: Params) -> float:
    """Gas mass fraction in the region the transfer channels cannot keep
    inside the box: outside |v| <= L - sqrt(2 eps0)."""
    total = float(np.sum(state.f1 + state.f2))
    if total <= 0.0:
        return 0.0
    safe = grid.half_width - np.sqrt(2.0 * params.eps0)
    if safe <= 0.0:
        return 1.0
    outside = grid.r2 > safe * safe
    return float(np.sum(state.f1[outside] + state.f2[outside]) / total)


def backend_name() -> str:
    """Which collision loop backend is active ("compiled" or "python")."""
    return BACKEND
