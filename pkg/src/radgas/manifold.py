"""Decomposition of near-balanced states and projection onto the manifold.

Every state near the balanced family (F, lam F, lam/(1-lam)) splits
uniquely as

    f1 = F + alpha,   f2 = lam F - alpha,   q = lam/(1-lam) + theta,

with the gauge constraint int alpha dv = int theta dn.  Eliminating
(F, alpha, theta) exactly for a given lam leaves one scalar equation

    g(lam) = int f1 dv - int (f1+f2)/(1+lam) dv - int q dn + lam/(1-lam)

whose derivative int (f1+f2)/(1+lam)^2 + 1/(1-lam)^2 is strictly
positive, so g has a unique root in (0,1) for positive states and a
safeguarded Newton iteration finds it unconditionally.

project_tangent pushes a pair of gas increments (k1, k2) onto the
tangent space of the balanced family:

    d_photon   = -(1+lam) I1 / D,       D = (1+lam) + (1-lam)^2 int F,
    d_lambda   = (1-lam)^2 d_photon,
    d_f        = (k1+k2)/(1+lam) + (1-lam)^2 F I1 / D,
    d_lambda_f = lam d_f + F d_lambda,

with I1 = int k1 dv.  The last two outputs are defined through the
product and chain rules, so the consistency identities between the four
components hold to roundoff by construction.

null_pairing evaluates the family of linear functionals, indexed by a
velocity weight phi and a scalar eta, that vanish on the range of the
linearized radiative exchange; this is what makes the projected
dynamics independent of the fast exchange term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    FullState,
    GuardError,
    ManifoldState,
    Params,
    Remainder,
    SphereQuadrature,
    VelocityGrid,
    integrate_sphere,
    integrate_velocity,
    remainder_norm,
)

_LAM_HI = 1.0 - 1e-9
_MAX_ITERS = 80


@dataclass(frozen=True)
class ResidualRecord:
    """Pointwise gaps of a candidate decomposition, plus the gauge gap."""

    gap_f1: np.ndarray
    gap_f2: np.ndarray
    gap_q: np.ndarray
    gap_mass: float
    norm: float


@dataclass(frozen=True)
class DecompositionResult:
    m: ManifoldState
    w: Remainder
    residual_norm: float
    newton_iters: int


@dataclass(frozen=True)
class ProjectedIncrement:
    """Tangent components of a projected gas increment.

    d_lambda_f and d_photon are derived from (d_lambda, d_f) by the
    product and chain rules, so d_lambda_f = lam d_f + F d_lambda and
    d_photon = d_lambda/(1-lam)^2 hold exactly.
    """

    d_lambda: float
    d_f: np.ndarray
    d_lambda_f: np.ndarray
    d_photon: float


def residual_H(
    full: FullState,
    m: ManifoldState,
    w: Remainder,
    grid: VelocityGrid,
    quad: SphereQuadrature,
) -> ResidualRecord:
    """Gaps of (m, w) as a candidate decomposition of the full state."""
    lam = m.lam
    if lam >= 1.0:
        raise ValueError("decomposition requires lam < 1")
    gap_f1 = full.f1 - m.f - w.alpha
    gap_f2 = full.f2 - lam * m.f + w.alpha
    gap_q = full.q - lam / (1.0 - lam) - w.theta
    gap_mass = integrate_velocity(w.alpha, grid) - integrate_sphere(w.theta, quad)
    norm = max(
        float(np.max(np.abs(gap_f1))),
        float(np.max(np.abs(gap_f2))),
        float(np.max(np.abs(gap_q))),
        abs(gap_mass),
    )
    return ResidualRecord(gap_f1, gap_f2, gap_q, gap_mass, norm)


def neighborhood_radius(
    full: FullState,
    grid: VelocityGrid,
    quad: SphereQuadrature,
    params: Params,
) -> float:
    """Default radius of the neighborhood where decomposition is trusted.

    2 eps0 kappa / (64 (2 eps0 + E)) with kappa the gas mass and E the
    combined mass-energy functional (weight 1 + |v|^2 on the gas, plus
    the internal and photon contributions).
    """
    kappa = integrate_velocity(full.f1 + full.f2, grid)
    energy = (
        integrate_velocity(full.f1 + full.f2, grid, weight_exponent=2)
        + 2.0 * params.eps0 * integrate_velocity(full.f2, grid)
        + 2.0 * params.eps0 * integrate_sphere(full.q, quad)
    )
    return 2.0 * params.eps0 * kappa / (64.0 * (2.0 * params.eps0 + energy))


def decompose(
    full: FullState,
    grid: VelocityGrid,
    quad: SphereQuadrature,
    params: Params,
    initial_guess: ManifoldState | None = None,
    guard_radius: float | None = None,
) -> DecompositionResult:
    """Split a positive near-balanced state into base point and remainder.

    Safeguarded Newton on the scalar root problem g(lam) = 0; the other
    three components are eliminated exactly at each iterate.
    """
    if full.min_value() < 0.0:
        raise ValueError("decomposition requires a nonnegative state")
    mass1 = integrate_velocity(full.f1, grid)
    mass12 = mass1 + integrate_velocity(full.f2, grid)
    qbar = integrate_sphere(full.q, quad)

    def g(lam: float) -> float:
        return mass1 - mass12 / (1.0 + lam) - qbar + lam / (1.0 - lam)

    def dg(lam: float) -> float:
        return mass12 / (1.0 + lam) ** 2 + 1.0 / (1.0 - lam) ** 2

    lo, hi = 0.0, _LAM_HI
    lam = initial_guess.lam if initial_guess is not None else qbar / (1.0 + qbar)
    lam = min(max(lam, lo), hi)
    iters = 0
    val = g(lam)
    while abs(val) > params.tol_newton and iters < _MAX_ITERS:
        # g is strictly increasing, so the sign locates the root.
        if val > 0.0:
            hi = lam
        else:
            lo = lam
        step = lam - val / dg(lam)
        lam = step if lo < step < hi else 0.5 * (lo + hi)
        val = g(lam)
        iters += 1
    if abs(val) > params.tol_newton:
        raise ValueError("no balanced decomposition found in (0, 1)")

    f = (full.f1 + full.f2) / (1.0 + lam)
    if float(f.min()) < 0.0:
        raise ValueError("decomposed gas density is not positive")
    alpha = full.f1 - f
    theta = full.q - lam / (1.0 - lam)
    m = ManifoldState(lam=lam, f=f)
    w = Remainder(alpha=alpha, theta=theta)

    radius = (
        guard_radius
        if guard_radius is not None
        else neighborhood_radius(full, grid, quad, params)
    )
    wnorm = remainder_norm(w, grid, quad)
    if wnorm > radius:
        raise GuardError(
            "state lies outside the balanced-manifold neighborhood: "
            f"remainder {wnorm:.3e} exceeds radius {radius:.3e}"
        )
    record = residual_H(full, m, w, grid, quad)
    return DecompositionResult(m=m, w=w, residual_norm=record.norm, newton_iters=iters)


def project_tangent(
    m: ManifoldState,
    k1: np.ndarray,
    k2: np.ndarray,
    grid: VelocityGrid,
    mass_rate_1: float | None = None,
) -> ProjectedIncrement:
    """Project gas increments (k1, k2) onto the balanced-family tangent.

    mass_rate_1 overrides int k1 dv when a more accurate value of that
    moment is available than direct quadrature of the k1 field.
    """
    lam = m.lam
    if not 0.0 <= lam < 1.0:
        raise ValueError("projection requires lam in [0, 1)")
    i1 = mass_rate_1 if mass_rate_1 is not None else integrate_velocity(k1, grid)
    one_m = 1.0 - lam
    denom = (1.0 + lam) + one_m**2 * integrate_velocity(m.f, grid)
    d_photon = -(1.0 + lam) * i1 / denom
    d_lambda = one_m**2 * d_photon
    d_f = (k1 + k2) / (1.0 + lam) + one_m**2 * m.f * i1 / denom
    d_lambda_f = lam * d_f + m.f * d_lambda
    return ProjectedIncrement(
        d_lambda=d_lambda, d_f=d_f, d_lambda_f=d_lambda_f, d_photon=d_photon
    )


def null_pairing(
    phi: np.ndarray,
    eta: float,
    lam: float,
    row_f1: np.ndarray,
    row_f2: np.ndarray,
    row_q: np.ndarray,
    grid: VelocityGrid,
    quad: SphereQuadrature,
) -> float:
    """Pairing that vanishes on the range of the linearized exchange.

    int phi row_f1 dv + int [phi + (1-lam)^2 eta] row_f2 dv
    + (1-lam)^2 eta int row_q dn, for any velocity weight phi and any
    scalar eta.
    """
    one_m2 = (1.0 - lam) ** 2
    return (
        integrate_velocity(phi * row_f1, grid)
        + integrate_velocity((phi + one_m2 * eta) * row_f2, grid)
        + one_m2 * eta * integrate_sphere(row_q, quad)
    )


def orthogonal_structure_check(
    w: Remainder,
    grid: VelocityGrid,
    quad: SphereQuadrature,
    params: Params,
) -> bool:
    """Whether the remainder satisfies the gauge constraint."""
    gap = integrate_velocity(w.alpha, grid) - integrate_sphere(w.theta, quad)
    return abs(gap) <= params.tol_conservation
