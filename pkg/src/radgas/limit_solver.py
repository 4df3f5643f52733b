"""The reduced system left after the radiative exchange equilibrates.

When the exchange runs infinitely fast the full state is pinned to the
balanced family (F, lam F, lam/(1-lam)) and the pair (lam, F) obeys

    d lam/dt = -(1-lam)^2 (1+lam)/D * I1,
    d F/dt   = (K1 + K2)/(1+lam) + (1-lam)^2 F/D * I1,

with D = (1+lam) + (1-lam)^2 int F and I1 = int K1 dv, the collision
increments being evaluated at (F, lam F).  I1 comes from the weak-form
moment evaluator: the elastic channel integrates to zero there by exact
cancellation, which removes the dominant quadrature error from the slow
lam drift.  The cutoff variant feeds the clamped kernels through the
same formulas.

Conserved along trajectories: the gas mass (1+lam) int F, momentum, and

    E = int [(1+|v|^2)(1+lam) F + 2 eps0 lam F] dv + 2 eps0 lam/(1-lam).

Energy conservation bounds the photon fraction: lam <= E0/(2 eps0 + E0)
for all time.  The entropy

    H = int [(1+lam) F log F + F lam log lam] dv
        + lam/(1-lam) log lam + log(1-lam)

is non-increasing and bounded below by
K = -2 C_E - E/e - 1 - log(2 eps0/(2 eps0 + E)), C_E = E + pi^(3/2); it
exists only for equal spontaneous and stimulated rates (a0 = b0), and
entropy_limit refuses to evaluate otherwise.

The fast subsystem (rho2, I) isolates the exchange alone: with
a = int f1 dv frozen and c0 = rho2 + I conserved,

    d rho2/d tau = -rho2 (I+1) + I a,
    d I/d tau    =  I (rho2 - a) + rho2,

and every positive orbit relaxes to the closed-form fixed point
returned by fast_subsystem_equilibrium.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .collision import conservative_correction, eval_K, transfer_pair, weak_moment
from .core import (
    GuardError,
    ManifoldState,
    Params,
    SphereQuadrature,
    VelocityGrid,
    compose,
    integrate_velocity,
    l1k_norm,
    zero_remainder,
)
from .kinematics import (
    CollisionPair,
    elastic_post,
    kernel_elastic,
    kernel_elastic_cutoff,
    kernel_ne12,
    kernel_ne12_cutoff,
    nonelastic_post,
)
from .manifold import project_tangent

_LAM_CAP = 1.0 - 1e-12
_LAM_ESCAPE = 1e-9


@dataclass(frozen=True)
class LimitTrajectory:
    """Recorded (lam, F) states and diagnostics of one reduced run."""

    times: np.ndarray
    states: list[ManifoldState]
    lam: np.ndarray
    mass: np.ndarray
    momentum: np.ndarray
    energy: np.ndarray
    entropy: np.ndarray
    l14: np.ndarray
    clamp_events: int
    aborted: str | None


def eval_T(
    m: ManifoldState,
    grid: VelocityGrid,
    quad: SphereQuadrature,
    params: Params,
    cutoff_n=None,
    threads: int = 1,
) -> tuple[float, np.ndarray]:
    """Rate of change of (lam, F) under the reduced dynamics."""
    state = compose(m, zero_remainder(grid, quad))
    inc = conservative_correction(
        eval_K(state, grid, quad, params, cutoff_n=cutoff_n, threads=threads),
        grid,
        params,
    )
    one, zero = transfer_pair()
    i1 = weak_moment(
        state, grid, quad, params, one, zero, cutoff_n=cutoff_n, threads=threads
    )
    proj = project_tangent(m, inc.d_f1, inc.d_f2, grid, mass_rate_1=i1)
    return proj.d_lambda, proj.d_f


def _clamp_lam(raw: float) -> tuple[float, int]:
    if raw < 0.0:
        if raw < -_LAM_ESCAPE:
            raise GuardError(
                f"photon fraction left [0, 1) by {-raw:.3e}; energy bound violated"
            )
        return 0.0, 1
    if raw > _LAM_CAP:
        if raw > _LAM_CAP + _LAM_ESCAPE:
            raise GuardError(
                f"photon fraction left [0, 1) by {raw - _LAM_CAP:.3e}; "
                "energy bound violated"
            )
        return _LAM_CAP, 1
    return raw, 0


def _step_with_events(
    m: ManifoldState,
    grid: VelocityGrid,
    quad: SphereQuadrature,
    params: Params,
    dt: float,
    cutoff_n,
    threads: int,
) -> tuple[ManifoldState, int]:
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    events = 0

    def rate(s: ManifoldState):
        return eval_T(s, grid, quad, params, cutoff_n=cutoff_n, threads=threads)

    def shifted(h: float, k) -> ManifoldState:
        nonlocal events
        lam, ev = _clamp_lam(m.lam + h * k[0])
        events += ev
        return ManifoldState(lam=lam, f=m.f + h * k[1])

    k1 = rate(m)
    k2 = rate(shifted(0.5 * dt, k1))
    k3 = rate(shifted(0.5 * dt, k2))
    k4 = rate(shifted(dt, k3))
    sixth = dt / 6.0
    lam, ev = _clamp_lam(
        m.lam + sixth * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    )
    events += ev
    f = m.f + sixth * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    return ManifoldState(lam=lam, f=f), events


def step_limit(
    m: ManifoldState,
    grid: VelocityGrid,
    quad: SphereQuadrature,
    params: Params,
    dt: float,
    cutoff_n=None,
    threads: int = 1,
) -> ManifoldState:
    """One RK4 step of the reduced system."""
    out, _ = _step_with_events(m, grid, quad, params, dt, cutoff_n, threads)
    return out


def energy_limit(m: ManifoldState, grid: VelocityGrid, params: Params) -> float:
    """Combined mass-energy of the reduced system; conserved."""
    lam = m.lam
    if lam >= 1.0:
        raise ValueError("energy requires lam < 1")
    gas = (1.0 + lam) * integrate_velocity(m.f, grid, weight_exponent=2)
    internal = 2.0 * params.eps0 * lam * integrate_velocity(m.f, grid)
    return gas + internal + 2.0 * params.eps0 * lam / (1.0 - lam)


def entropy_limit(m: ManifoldState, grid: VelocityGrid, params: Params) -> float:
    """Entropy of the reduced system; non-increasing along trajectories."""
    if params.a0 != params.b0:
        raise ValueError(
            "the reduced entropy exists only for equal spontaneous and "
            "stimulated rates (a0 = b0)"
        )
    lam = m.lam
    if lam >= 1.0:
        raise ValueError("entropy requires lam < 1")
    f = m.f
    flogf = np.where(f > 0.0, f * np.log(np.where(f > 0.0, f, 1.0)), 0.0)
    gas = (1.0 + lam) * integrate_velocity(flogf, grid)
    if lam > 0.0:
        gas += lam * math.log(lam) * integrate_velocity(f, grid)
        photon = (lam / (1.0 - lam)) * math.log(lam)
    else:
        photon = 0.0
    return gas + photon + math.log(1.0 - lam)


def entropy_lower_bound(energy: float, eps0: float) -> float:
    """Floor below which the reduced entropy cannot fall at given energy."""
    c_e = energy + math.pi**1.5
    return -2.0 * c_e - energy / math.e - 1.0 - math.log(
        2.0 * eps0 / (2.0 * eps0 + energy)
    )


def lambda_bound(energy: float, eps0: float) -> float:
    """Largest photon fraction the energy budget allows."""
    return energy / (2.0 * eps0 + energy)


def run_limit(
    initial: ManifoldState,
    grid: VelocityGrid,
    quad: SphereQuadrature,
    params: Params,
    t_end: float,
    dt: float,
    cutoff_n=None,
    threads: int = 1,
    record_every: int = 1,
) -> LimitTrajectory:
    """Integrate the reduced system, recording diagnostics.

    On a numerical failure the trajectory built so far is returned with
    the failure message in `aborted` instead of raising.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if t_end < 0.0:
        raise ValueError("t_end must be nonnegative")
    if record_every < 1:
        raise ValueError("record_every must be at least 1")

    n_steps = int(np.ceil(t_end / dt - 1e-12)) if t_end > 0.0 else 0
    times = [0.0]
    states = [initial]
    clamp_events = 0
    aborted = None
    m = initial
    t = 0.0
    for k in range(n_steps):
        step_dt = min(dt, t_end - t)
        try:
            m, events = _step_with_events(
                m, grid, quad, params, step_dt, cutoff_n, threads
            )
        except ValueError as err:
            aborted = str(err)
            break
        clamp_events += events
        t += step_dt
        if (k + 1) % record_every == 0 or k == n_steps - 1:
            times.append(t)
            states.append(m)

    nodes = grid.nodes
    count = len(states)
    lam = np.empty(count)
    mass = np.empty(count)
    momentum = np.empty((count, 3))
    energy = np.empty(count)
    entropy = np.empty(count)
    l14 = np.empty(count)
    entropy_defined = params.a0 == params.b0
    for i, s in enumerate(states):
        lam[i] = s.lam
        mass[i] = (1.0 + s.lam) * integrate_velocity(s.f, grid)
        momentum[i] = (1.0 + s.lam) * (s.f @ nodes) * grid.cell_volume
        energy[i] = energy_limit(s, grid, params)
        entropy[i] = entropy_limit(s, grid, params) if entropy_defined else np.nan
        l14[i] = l1k_norm(s.f, grid, 4)
    return LimitTrajectory(
        times=np.asarray(times),
        states=states,
        lam=lam,
        mass=mass,
        momentum=momentum,
        energy=energy,
        entropy=entropy,
        l14=l14,
        clamp_events=clamp_events,
        aborted=aborted,
    )


def limit_csv(traj: LimitTrajectory) -> str:
    """Diagnostics as CSV text: t, lambda, mass, E, H, l14_norm."""
    lines = ["t,lambda,mass,E,H,l14_norm"]
    for i, t in enumerate(traj.times):
        lines.append(
            f"{t:.17g},{traj.lam[i]:.17g},{traj.mass[i]:.17g},"
            f"{traj.energy[i]:.17g},{traj.entropy[i]:.17g},{traj.l14[i]:.17g}"
        )
    return "\n".join(lines) + "\n"


def fast_subsystem_rhs(rho2: float, i_photon: float, a: float) -> tuple[float, float]:
    """Exchange-only rates for excited mass rho2 and photon density I."""
    d_rho2 = -rho2 * (i_photon + 1.0) + i_photon * a
    d_i = i_photon * (rho2 - a) + rho2
    return d_rho2, d_i


def fast_subsystem_equilibrium(a: float, c0: float) -> tuple[float, float]:
    """Fixed point of the exchange on the invariant line rho2 + I = c0."""
    if a <= 0.0:
        raise ValueError("total gas mass a must be positive")
    if c0 < 0.0:
        raise ValueError("conserved total c0 must be nonnegative")
    b = 1.0 - c0 + a
    i_inf = 0.5 * (-b + math.sqrt(b * b + 4.0 * c0))
    return c0 - i_inf, i_inf


def lipschitz_probe(
    m1: ManifoldState,
    m2: ManifoldState,
    grid: VelocityGrid,
    quad: SphereQuadrature,
    params: Params,
    cutoff_n=None,
    threads: int = 1,
) -> float:
    """Rate-of-change contrast divided by state contrast.

    The norm is |lam| + the (1+|v|^2)-weighted L1 norm of the gas
    density; sampling pairs and taking the max estimates an empirical
    Lipschitz constant of the reduced operator.
    """
    gap = abs(m1.lam - m2.lam) + l1k_norm(m1.f - m2.f, grid, 2)
    if gap == 0.0:
        raise ValueError("states coincide; the contrast ratio is undefined")
    d_lam1, d_f1 = eval_T(m1, grid, quad, params, cutoff_n=cutoff_n, threads=threads)
    d_lam2, d_f2 = eval_T(m2, grid, quad, params, cutoff_n=cutoff_n, threads=threads)
    out_gap = abs(d_lam1 - d_lam2) + l1k_norm(d_f1 - d_f2, grid, 2)
    return out_gap / gap


def _trilinear(values: np.ndarray, grid: VelocityGrid, points: np.ndarray) -> np.ndarray:
    """Trilinear interpolation of a grid field; zero outside the box."""
    n = grid.n_per_axis
    field = values.reshape(n, n, n)
    t = (points + grid.half_width) / grid.spacing
    inside = np.all((t >= 0.0) & (t <= n - 1.0), axis=-1)
    lo = np.floor(np.clip(t, 0.0, n - 1.0 - 1e-12)).astype(np.int64)
    fr = t - lo
    out = np.zeros(points.shape[:-1])
    for corner in range(8):
        ox, oy, oz = corner >> 2 & 1, corner >> 1 & 1, corner & 1
        w = (
            (fr[..., 0] if ox else 1.0 - fr[..., 0])
            * (fr[..., 1] if oy else 1.0 - fr[..., 1])
            * (fr[..., 2] if oz else 1.0 - fr[..., 2])
        )
        out += w * field[
            np.clip(lo[..., 0] + ox, 0, n - 1),
            np.clip(lo[..., 1] + oy, 0, n - 1),
            np.clip(lo[..., 2] + oz, 0, n - 1),
        ]
    return np.where(inside, out, 0.0)


def dissipation_integrands(
    m: ManifoldState,
    grid: VelocityGrid,
    params: Params,
    v1: np.ndarray,
    v2: np.ndarray,
    omega: np.ndarray,
    cutoff_n=None,
) -> tuple[np.ndarray, np.ndarray]:
    """Entropy-dissipation integrands at sampled collision nodes.

    For each row (v1, v2, omega) returns the elastic integrand

        (1+lam)^2/4 * B_el * (F3 F4 - F1 F2) * log(F1 F2 / (F3 F4))

    and the transfer integrand

        B12 * (lam F3 F4 - F1 F2) * log(F1 F2 / (lam F3 F4)),

    each of the form (z - y) log(y/z) <= 0.  Whenever either product is
    nonpositive (vacuum regions, closed channel) the integrand is 0 by
    convention.  Non-positivity of every node is the pointwise H-theorem.
    """
    lam = m.lam
    count = v1.shape[0]
    el = np.zeros(count)
    tr = np.zeros(count)

    def f_at(point: np.ndarray) -> float:
        return float(_trilinear(m.f, grid, point[None, :])[0])

    for i in range(count):
        pair = CollisionPair(v1[i], v2[i])
        fa = f_at(v1[i])
        fb = f_at(v2[i])
        y = fa * fb
        b_el = (
            kernel_elastic(pair)
            if cutoff_n is None
            else kernel_elastic_cutoff(pair, cutoff_n)
        )
        va, vb = elastic_post(pair, omega[i])
        z = f_at(va) * f_at(vb)
        if y > 0.0 and z > 0.0 and b_el > 0.0:
            el[i] = 0.25 * (1.0 + lam) ** 2 * b_el * (z - y) * math.log(y / z)
        b12 = (
            kernel_ne12(pair, params.eps0, params.c0_kernel)
            if cutoff_n is None
            else kernel_ne12_cutoff(pair, params.eps0, params.c0_kernel, cutoff_n)
        )
        post = nonelastic_post(pair, omega[i], params.eps0)
        if post is not None and b12 > 0.0:
            z = lam * f_at(post[0]) * f_at(post[1])
            if y > 0.0 and z > 0.0:
                tr[i] = b12 * (z - y) * math.log(y / z)
    return el, tr
