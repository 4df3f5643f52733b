"""Collision velocity transforms and collision kernels.

Two collision families act on the gas:

* elastic: both molecules keep their species; momentum and kinetic energy
  are conserved.  Post velocities are c +/- (|d|/2) w for center c,
  relative velocity d and a unit vector w.
* energy transfer: two ground molecules turn into (excited, ground),
  storing kinetic energy 2*eps0 internally (endothermic, closed below
  relative speed 2*sqrt(eps0)), or the reverse releasing 2*eps0
  (exothermic, always open).

Kernels are hard-sphere based: |d| for elastic and
c0*sqrt(|d|^2 -+ 4*eps0)/2 for the transfer channels.  Cut-off variants
clamp or gate the kernels at relative speed n; the two gated thresholds
(n on the endothermic side, sqrt(n^2-4*eps0) on the exothermic side)
describe the same set of collisions, which cutoff_equivalence_check
verifies sample by sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CollisionPair",
    "elastic_post",
    "nonelastic_post",
    "nonelastic_pre",
    "kernel_elastic",
    "kernel_ne12",
    "kernel_ne34",
    "kernel_elastic_cutoff",
    "kernel_ne12_cutoff",
    "kernel_ne34_cutoff",
    "cutoff_equivalence_check",
]


@dataclass(frozen=True)
class CollisionPair:
    """An ordered pair of pre-collision velocities."""

    v_a: np.ndarray
    v_b: np.ndarray

    def __post_init__(self) -> None:
        for name in ("v_a", "v_b"):
            v = np.array(getattr(self, name), dtype=np.float64)
            if v.shape != (3,) or not np.all(np.isfinite(v)):
                raise ValueError(f"{name} must be a finite 3-vector")
            object.__setattr__(self, name, v)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.v_a + self.v_b)

    @property
    def rel_speed_sq(self) -> float:
        d = self.v_a - self.v_b
        return float(d @ d)


def _check_unit(omega: np.ndarray) -> np.ndarray:
    w = np.asarray(omega, dtype=np.float64)
    if w.shape != (3,) or abs(math.sqrt(float(w @ w)) - 1.0) > 1e-12:
        raise ValueError("omega must be a unit 3-vector within 1e-12")
    return w


def elastic_post(pair: CollisionPair, omega: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Post velocities of an elastic collision: c +/- (|d|/2) omega."""
    w = _check_unit(omega)
    c = pair.center
    r = 0.5 * math.sqrt(pair.rel_speed_sq)
    return c + r * w, c - r * w


def nonelastic_post(
    pair: CollisionPair, omega: np.ndarray, eps0: float
) -> tuple[np.ndarray, np.ndarray] | None:
    """Post velocities of the endothermic transfer, or None when closed.

    Total kinetic energy drops by exactly 2*eps0; the channel needs
    relative speed squared at least 4*eps0.
    """
    w = _check_unit(omega)
    disc = 0.25 * pair.rel_speed_sq - eps0
    if disc < 0.0:
        return None
    c = pair.center
    r = math.sqrt(disc)
    return c + r * w, c - r * w


def nonelastic_pre(
    pair: CollisionPair, omega: np.ndarray, eps0: float
) -> tuple[np.ndarray, np.ndarray]:
    """Pre velocities reconstructed from a post pair (exothermic direction).

    Total kinetic energy rises by exactly 2*eps0; always defined.
    """
    w = _check_unit(omega)
    c = pair.center
    r = math.sqrt(0.25 * pair.rel_speed_sq + eps0)
    return c + r * w, c - r * w


def kernel_elastic(pair: CollisionPair) -> float:
    """Hard-sphere elastic kernel |v_a - v_b|."""
    return math.sqrt(pair.rel_speed_sq)


def kernel_ne12(pair: CollisionPair, eps0: float, c0: float) -> float:
    """Endothermic transfer kernel c0*sqrt(|d|^2-4*eps0)/2; 0 when closed."""
    s = pair.rel_speed_sq - 4.0 * eps0
    if s <= 0.0:
        return 0.0
    return 0.5 * c0 * math.sqrt(s)


def kernel_ne34(pair: CollisionPair, eps0: float, c0: float) -> float:
    """Exothermic transfer kernel c0*sqrt(|d|^2+4*eps0)/2; positive at |d|=0."""
    return 0.5 * c0 * math.sqrt(pair.rel_speed_sq + 4.0 * eps0)


def kernel_elastic_cutoff(pair: CollisionPair, n: float) -> float:
    """Elastic kernel clamped at relative speed n: min(|d|, n)."""
    return min(kernel_elastic(pair), float(n))


def kernel_ne12_cutoff(pair: CollisionPair, eps0: float, c0: float, n: float) -> float:
    """Endothermic kernel gated to relative speeds |d| <= n."""
    if pair.rel_speed_sq > n * n:
        return 0.0
    return kernel_ne12(pair, eps0, c0)


def kernel_ne34_cutoff(pair: CollisionPair, eps0: float, c0: float, n: float) -> float:
    """Exothermic kernel gated to |d| <= sqrt(n^2-4*eps0).

    For n <= 2*sqrt(eps0) the gate admits no collisions and the kernel is
    identically 0.
    """
    thr = n * n - 4.0 * eps0
    if thr < 0.0 or pair.rel_speed_sq > thr:
        return 0.0
    return kernel_ne34(pair, eps0, c0)


def cutoff_equivalence_check(
    pair_pre: CollisionPair, omega: np.ndarray, eps0: float, n: float
) -> bool:
    """Check that the two gate thresholds select the same collisions.

    For an open pre pair, |d_pre| <= n must hold exactly when the post
    pair satisfies |d_post| <= sqrt(n^2-4*eps0).  Raises when the channel
    is closed.
    """
    post = nonelastic_post(pair_pre, omega, eps0)
    if post is None:
        raise ValueError("channel closed: |d|^2 < 4*eps0")
    v3, v4 = post
    d_post = v3 - v4
    pre_inside = pair_pre.rel_speed_sq <= n * n
    thr = n * n - 4.0 * eps0
    post_inside = thr >= 0.0 and float(d_post @ d_post) <= thr
    return pre_inside == post_inside
