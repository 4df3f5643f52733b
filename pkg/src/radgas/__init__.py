"""Deterministic laboratory for a two-level gas exchanging energy with photons.

The package builds three layers on one shared discretization (uniform
velocity cube, 32-direction sphere rule):

  * the coupled kinetic system for two gas densities and a directional
    photon intensity, with elastic and level-changing collisions and a
    radiative exchange term, plus its stiff scaled variant;
  * the reduced system on the balanced manifold, where the photon field
    is slaved to the gas and the state is a photon fraction paired with
    a single density;
  * the decomposition machinery mapping full states to a manifold point
    plus a decaying remainder, and the experiment drivers that measure
    relaxation, stiff-to-reduced convergence, equilibration under
    cut-off kernels, and moment control.

Everything is deterministic: fixed quadratures, fixed step rules, no
sampling, byte-stable artifacts.
"""

from .core import (
    FullState,
    GuardError,
    ManifoldState,
    Params,
    Remainder,
    SphereQuadrature,
    VelocityGrid,
    compose,
    integrate_sphere,
    integrate_velocity,
    l1k_norm,
    remainder_norm,
    sphere_design_32,
    sphere_l1_norm,
    state_norm,
    zero_remainder,
)
from .kinematics import (
    CollisionPair,
    elastic_post,
    nonelastic_post,
    nonelastic_pre,
)
from .collision import (
    conservative_correction,
    eval_K,
    invariant_pairs,
    transfer_pair,
    weak_moment,
    weak_moment_multi,
)
from .radiation import eval_L_general, eval_Lcal, eval_R, photon_steady_state
from .full_solver import energy_full, entropy_full, eval_rhs, run_full, step_full
from .limit_solver import (
    energy_limit,
    entropy_limit,
    eval_T,
    fast_subsystem_equilibrium,
    fast_subsystem_rhs,
    lambda_bound,
    run_limit,
    step_limit,
)
from .manifold import (
    decompose,
    neighborhood_radius,
    project_tangent,
    residual_H,
)
from .experiments import (
    study_convergence,
    study_equilibrium,
    study_moment_bounds,
    study_relaxation,
)
from .collision import backend_name

__all__ = [
    "FullState",
    "GuardError",
    "ManifoldState",
    "Params",
    "Remainder",
    "SphereQuadrature",
    "VelocityGrid",
    "backend_name",
    "compose",
    "conservative_correction",
    "decompose",
    "elastic_post",
    "energy_full",
    "energy_limit",
    "entropy_full",
    "entropy_limit",
    "eval_K",
    "eval_L_general",
    "eval_Lcal",
    "eval_R",
    "eval_T",
    "eval_rhs",
    "fast_subsystem_equilibrium",
    "fast_subsystem_rhs",
    "integrate_sphere",
    "integrate_velocity",
    "invariant_pairs",
    "l1k_norm",
    "lambda_bound",
    "neighborhood_radius",
    "photon_steady_state",
    "project_tangent",
    "remainder_norm",
    "residual_H",
    "run_full",
    "run_limit",
    "sphere_design_32",
    "sphere_l1_norm",
    "state_norm",
    "step_full",
    "step_limit",
    "study_convergence",
    "study_equilibrium",
    "study_moment_bounds",
    "study_relaxation",
    "CollisionPair",
    "nonelastic_post",
    "nonelastic_pre",
    "transfer_pair",
    "weak_moment",
    "weak_moment_multi",
    "zero_remainder",
]

__version__ = "0.1.0"
