"""Radiative exchange between the gas and the photon field.

The exchange operator acts on a full state (f1, f2, q):

    d_f1(v) = a0 f2(v) + b0 qbar (f2(v) - f1(v)),   qbar = int q dn,
    d_f2(v) = -d_f1(v),
    d_q(n)  = a0 int f2 dv + b0 q(n) int (f2 - f1) dv,

with a0 the spontaneous-emission rate and b0 the stimulated rate (the
sphere measure is normalized to 1).  Emission moves an excited molecule
to the ground state and adds a photon; absorption does the reverse.  The
operator vanishes identically on states of the form
(F, lam F, lam/(1-lam)), which balance emission against absorption for
every velocity separately.

Two linearizations support the stiff-limit analysis.  eval_L_manifold is
the Frechet derivative of eval_R at such a balanced state, applied to a
remainder (alpha, theta) representing the perturbation
(alpha, -alpha, theta); it is linear in the remainder.  eval_Lcal is the
leftover quadratic part, bilinear in (alpha, theta), and is exactly the
difference eval_R(base + w) - eval_L_manifold(base, w) when a0 = b0 = 1.
eval_L_general applies the same linearization to an unconstrained
three-component perturbation (g1, g2, h); directions of the form
(xi, xi + (1 - lam) eta, eta) with eta constant lie in its kernel, which
is what makes the limit dynamics well defined.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    FullState,
    ManifoldState,
    Params,
    Remainder,
    SphereQuadrature,
    VelocityGrid,
    integrate_sphere,
    integrate_velocity,
)


@dataclass(frozen=True)
class RadiativeIncrement:
    """Time derivative contributed by radiative exchange.

    d_f2 = -d_f1 holds exactly by construction: every emission or
    absorption event swaps one molecule between the two levels.
    """

    d_f1: np.ndarray
    d_f2: np.ndarray
    d_q: np.ndarray


def _increment(d_f1: np.ndarray, d_q: np.ndarray) -> RadiativeIncrement:
    return RadiativeIncrement(d_f1=d_f1, d_f2=-d_f1, d_q=d_q)


def eval_R(
    state: FullState,
    grid: VelocityGrid,
    quad: SphereQuadrature,
    params: Params,
) -> RadiativeIncrement:
    """Radiative exchange rate for a full state."""
    qbar = integrate_sphere(state.q, quad)
    diff = state.f2 - state.f1
    d_f1 = params.a0 * state.f2 + params.b0 * qbar * diff
    mass2 = integrate_velocity(state.f2, grid)
    mass_diff = integrate_velocity(diff, grid)
    d_q = params.a0 * mass2 + params.b0 * state.q * mass_diff
    return _increment(d_f1, d_q)


def eval_L_manifold(
    base: ManifoldState,
    w: Remainder,
    grid: VelocityGrid,
    quad: SphereQuadrature,
    params: Params,
) -> RadiativeIncrement:
    """Linearized exchange at a balanced state, in remainder coordinates.

    Frechet derivative of eval_R at (F, lam F, lam/(1-lam)) applied to
    the perturbation (alpha, -alpha, theta):

        d_f1(v) = -a0 alpha + b0 [thetabar (lam-1) F - 2 alpha lam/(1-lam)],
        d_q(n)  = -a0 alphabar
                  + b0 [theta(n) (lam-1) int F dv - 2 alphabar lam/(1-lam)].
    """
    lam = base.lam
    if lam >= 1.0:
        raise ValueError("balanced state requires lam < 1")
    ratio = lam / (1.0 - lam)
    thetabar = integrate_sphere(w.theta, quad)
    alphabar = integrate_velocity(w.alpha, grid)
    mass_f = integrate_velocity(base.f, grid)
    d_f1 = -params.a0 * w.alpha + params.b0 * (
        thetabar * (lam - 1.0) * base.f - 2.0 * ratio * w.alpha
    )
    d_q = -params.a0 * alphabar + params.b0 * (
        w.theta * (lam - 1.0) * mass_f - 2.0 * ratio * alphabar
    )
    return _increment(d_f1, d_q)


def eval_Lcal(
    w: Remainder,
    grid: VelocityGrid,
    quad: SphereQuadrature,
) -> RadiativeIncrement:
    """Quadratic remainder-remainder exchange term.

    With the perturbation written as (alpha, -alpha, theta):

        d_f1(v) = -2 alpha(v) int theta dn,
        d_q(n)  = -2 theta(n) int alpha dv.

    Bilinear in (alpha, theta); carries no rate constants because it is
    the fixed quadratic part of the exchange bracket.
    """
    thetabar = integrate_sphere(w.theta, quad)
    alphabar = integrate_velocity(w.alpha, grid)
    d_f1 = -2.0 * thetabar * w.alpha
    d_q = -2.0 * alphabar * w.theta
    return _increment(d_f1, d_q)


def eval_L_general(
    lam: float,
    f_base: np.ndarray,
    g1: np.ndarray,
    g2: np.ndarray,
    h: np.ndarray,
    grid: VelocityGrid,
    quad: SphereQuadrature,
) -> RadiativeIncrement:
    """Linearized exchange applied to an unconstrained perturbation.

    Rows share the integrand
        lam/(1-lam) f_base (g2 - g1) - lam h(n) f_base:

        d_f1(v) = lam/(1-lam) f_base (g2 - g1) - lam hbar f_base,
        d_q(n)  = lam/(1-lam) int f_base (g2 - g1) dv
                  - lam h(n) int f_base dv.

    Perturbations (xi, xi + (1-lam) eta, eta) with eta constant make the
    integrand vanish pointwise, so they lie in the kernel.
    """
    if lam >= 1.0:
        raise ValueError("balanced state requires lam < 1")
    ratio = lam / (1.0 - lam)
    hbar = integrate_sphere(h, quad)
    diff = g2 - g1
    d_f1 = ratio * f_base * diff - lam * hbar * f_base
    d_q = ratio * integrate_velocity(f_base * diff, grid) - lam * h * integrate_velocity(
        f_base, grid
    )
    return _increment(d_f1, d_q)


def photon_steady_state(state: FullState, grid: VelocityGrid) -> float:
    """Photon density that balances emission against absorption.

    Returns int f2 dv / int (f1 - f2) dv.  Exists only while the ground
    level holds more mass than the excited level.
    """
    mass2 = integrate_velocity(state.f2, grid)
    mass_diff = integrate_velocity(state.f1 - state.f2, grid)
    if mass_diff <= 0.0:
        raise ValueError(
            "no steady photon density: excited mass must stay below ground mass"
        )
    return mass2 / mass_diff
