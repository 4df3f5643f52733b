"""Time integration of the coupled gas-photon system.

The state (f1, f2, q) evolves by

    df1/dt = K1 + s R1,   df2/dt = K2 + s R2,   dq/dt = s Rq,

with K the conservative-corrected collision rates, R the radiative
exchange, and s = 1 for the plain system or 1/eps_scale for the stiff
variant in which the exchange runs much faster than the collisions.

Integration is explicit RK4.  The stiff variant therefore demands
dt <= eps_scale/4 (exchange rates are of order (a0 + b0 qbar)/eps, so
this keeps |rate * dt| far inside the RK4 stability region for the
photon levels these studies reach); at desk scale this brute-force
resolution of the fast exchange is cheaper and more faithful than
operator splitting, which would linearize the bilinear photon-gas
product.

Trilinear interpolation can push individual cells a hair below zero.
A step whose worst undershoot stays below 1e-12 of the state norm is
repaired by zeroing the negative cells and scaling the positive ones so
each field keeps its exact integral; anything worse aborts the step
with advice to shrink dt.

The entropy of the full system is

    int (f1 log f1 + f2 log f2) dv
    + int (q log q - (a0/b0 + q) log(a0/b0 + q)) dn,

with the convention 0 log 0 = 0.  Along trajectories it is
non-increasing; the diagnostics record it together with mass, momentum,
energy (including the 2 eps0 internal and photon contributions) and the
per-field minima.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .collision import conservative_correction, eval_K
from .core import (
    FullState,
    Params,
    SphereQuadrature,
    VelocityGrid,
    integrate_sphere,
    integrate_velocity,
    state_norm,
)
from .radiation import eval_R

_FLOOR_FRACTION = 1e-12


@dataclass(frozen=True)
class FullTrajectory:
    """Recorded states and per-record diagnostics of one integration.

    aborted carries the failure message when the run stopped early; the
    trajectory then holds every state accepted before the failure.
    """

    times: np.ndarray
    states: list[FullState]
    kappa: np.ndarray
    momentum: np.ndarray
    energy: np.ndarray
    entropy: np.ndarray
    min_f1: np.ndarray
    min_f2: np.ndarray
    min_q: np.ndarray
    clamp_events: int
    aborted: str | None


def eval_rhs(
    state: FullState,
    grid: VelocityGrid,
    quad: SphereQuadrature,
    params: Params,
    scaled: bool = False,
    cutoff_n=None,
    threads: int = 1,
    include_collisions: bool = True,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Combined collision and radiative rate of change.

    include_collisions=False drops the collision terms, leaving the pure
    exchange dynamics whose per-velocity relaxation the reduced two-scalar
    subsystem summarizes.
    """
    rad = eval_R(state, grid, quad, params)
    fac = 1.0 / params.eps_scale if scaled else 1.0
    if not include_collisions:
        return fac * rad.d_f1, fac * rad.d_f2, fac * rad.d_q
    kin = conservative_correction(
        eval_K(state, grid, quad, params, cutoff_n=cutoff_n, threads=threads),
        grid,
        params,
    )
    return (
        kin.d_f1 + fac * rad.d_f1,
        kin.d_f2 + fac * rad.d_f2,
        fac * rad.d_q,
    )


def _clamp_nonnegative(field: np.ndarray) -> np.ndarray:
    """Zero the negative cells, scaling positives to keep the integral."""
    negative = field < 0.0
    deficit = -float(field[negative].sum())
    out = np.where(negative, 0.0, field)
    positive_total = float(out.sum())
    if positive_total > 0.0:
        out = out * ((positive_total - deficit) / positive_total)
    return out


def _repair_floors(
    state: FullState, reference_norm: float
) -> tuple[FullState, int]:
    worst = -min(state.min_value(), 0.0)
    if worst == 0.0:
        return state, 0
    if worst >= _FLOOR_FRACTION * reference_norm:
        raise ValueError(
            f"negativity {worst:.3e} exceeds the repairable floor; "
            "reduce dt"
        )
    return (
        FullState(
            f1=_clamp_nonnegative(state.f1),
            f2=_clamp_nonnegative(state.f2),
            q=_clamp_nonnegative(state.q),
        ),
        1,
    )


def _step_with_events(
    state: FullState,
    grid: VelocityGrid,
    quad: SphereQuadrature,
    params: Params,
    dt: float,
    scaled: bool,
    cutoff_n,
    threads: int,
    include_collisions: bool = True,
) -> tuple[FullState, int]:
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if scaled and dt > params.eps_scale / 4.0 * (1.0 + 1e-12):
        raise ValueError(
            "time step too large for the stiff exchange: need dt <= eps_scale/4"
        )

    def rhs(s: FullState):
        return eval_rhs(
            s, grid, quad, params, scaled, cutoff_n, threads, include_collisions
        )

    def shifted(h: float, k) -> FullState:
        return FullState(
            f1=state.f1 + h * k[0], f2=state.f2 + h * k[1], q=state.q + h * k[2]
        )

    k1 = rhs(state)
    k2 = rhs(shifted(0.5 * dt, k1))
    k3 = rhs(shifted(0.5 * dt, k2))
    k4 = rhs(shifted(dt, k3))
    sixth = dt / 6.0
    out = FullState(
        f1=state.f1 + sixth * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        f2=state.f2 + sixth * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        q=state.q + sixth * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    )
    return _repair_floors(out, state_norm(state.f1, state.f2, state.q, grid, quad))


def step_full(
    state: FullState,
    grid: VelocityGrid,
    quad: SphereQuadrature,
    params: Params,
    dt: float,
    scaled: bool = False,
    cutoff_n=None,
    threads: int = 1,
    include_collisions: bool = True,
) -> FullState:
    """One RK4 step of the coupled system."""
    out, _ = _step_with_events(
        state, grid, quad, params, dt, scaled, cutoff_n, threads, include_collisions
    )
    return out


def _xlogx(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0.0, x * np.log(np.where(x > 0.0, x, 1.0)), 0.0)


def entropy_full(
    state: FullState,
    grid: VelocityGrid,
    quad: SphereQuadrature,
    params: Params,
) -> float:
    """Entropy of the full system; decreases along trajectories."""
    if state.min_value() < 0.0:
        raise ValueError("entropy requires a nonnegative state")
    gas = integrate_velocity(_xlogx(state.f1) + _xlogx(state.f2), grid)
    ratio = params.a0 / params.b0
    photon = integrate_sphere(_xlogx(state.q) - _xlogx(ratio + state.q), quad)
    return gas + photon


def energy_full(
    state: FullState,
    grid: VelocityGrid,
    quad: SphereQuadrature,
    params: Params,
) -> float:
    """Conserved energy: kinetic + internal + photon contributions."""
    kinetic = float(np.sum((state.f1 + state.f2) * grid.r2)) * grid.cell_volume
    internal = 2.0 * params.eps0 * integrate_velocity(state.f2, grid)
    photon = 2.0 * params.eps0 * integrate_sphere(state.q, quad)
    return kinetic + internal + photon


def run_full(
    initial: FullState,
    grid: VelocityGrid,
    quad: SphereQuadrature,
    params: Params,
    t_end: float,
    dt: float,
    scaled: bool = False,
    cutoff_n=None,
    threads: int = 1,
    record_every: int = 1,
    include_collisions: bool = True,
) -> FullTrajectory:
    """Integrate from the initial state, recording diagnostics.

    On a numerical failure the trajectory built so far is returned with
    the failure message in `aborted` instead of raising.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if t_end < 0.0:
        raise ValueError("t_end must be nonnegative")
    if record_every < 1:
        raise ValueError("record_every must be at least 1")
    if scaled and dt > params.eps_scale / 4.0 * (1.0 + 1e-12):
        raise ValueError(
            "time step too large for the stiff exchange: need dt <= eps_scale/4"
        )

    n_steps = int(np.ceil(t_end / dt - 1e-12)) if t_end > 0.0 else 0
    times = [0.0]
    states = [initial]
    clamp_events = 0
    aborted = None
    state = initial
    t = 0.0
    for k in range(n_steps):
        step_dt = min(dt, t_end - t)
        try:
            state, events = _step_with_events(
                state,
                grid,
                quad,
                params,
                step_dt,
                scaled,
                cutoff_n,
                threads,
                include_collisions,
            )
        except ValueError as err:
            aborted = str(err)
            break
        clamp_events += events
        t += step_dt
        if (k + 1) % record_every == 0 or k == n_steps - 1:
            times.append(t)
            states.append(state)

    nodes = grid.nodes
    kappa = np.empty(len(states))
    momentum = np.empty((len(states), 3))
    energy = np.empty(len(states))
    entropy = np.empty(len(states))
    min1 = np.empty(len(states))
    min2 = np.empty(len(states))
    minq = np.empty(len(states))
    for i, s in enumerate(states):
        gas = s.f1 + s.f2
        kappa[i] = integrate_velocity(gas, grid)
        momentum[i] = (gas @ nodes) * grid.cell_volume
        energy[i] = energy_full(s, grid, quad, params)
        entropy[i] = entropy_full(s, grid, quad, params)
        min1[i] = float(s.f1.min())
        min2[i] = float(s.f2.min())
        minq[i] = float(s.q.min())
    return FullTrajectory(
        times=np.asarray(times),
        states=states,
        kappa=kappa,
        momentum=momentum,
        energy=energy,
        entropy=entropy,
        min_f1=min1,
        min_f2=min2,
        min_q=minq,
        clamp_events=clamp_events,
        aborted=aborted,
    )


def trajectory_csv(traj: FullTrajectory) -> str:
    """Diagnostics as CSV text: t, kappa, px, py, pz, E, H, minima."""
    lines = ["t,kappa,px,py,pz,E,H,min_f1,min_f2,min_q"]
    for i, t in enumerate(traj.times):
        px, py, pz = traj.momentum[i]
        lines.append(
            f"{t:.17g},{traj.kappa[i]:.17g},{px:.17g},{py:.17g},{pz:.17g},"
            f"{traj.energy[i]:.17g},{traj.entropy[i]:.17g},"
            f"{traj.min_f1[i]:.17g},{traj.min_f2[i]:.17g},{traj.min_q[i]:.17g}"
        )
    return "\n".join(lines) + "\n"
