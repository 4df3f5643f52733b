"""Shared fixtures: small grids, the sphere rule, default constants."""

import numpy as np
import pytest

from radgas.core import Params, SphereQuadrature, VelocityGrid, sphere_design_32


@pytest.fixture(scope="session")
def quad() -> SphereQuadrature:
    return sphere_design_32()


@pytest.fixture(scope="session")
def params() -> Params:
    return Params()


@pytest.fixture(scope="session")
def grid6() -> VelocityGrid:
    return VelocityGrid(6, 3.0)


@pytest.fixture(scope="session")
def grid8() -> VelocityGrid:
    return VelocityGrid(8, 3.5)


def gaussian(grid: VelocityGrid, amp: float = 1.0, width: float = 1.0,
             shift=(0.0, 0.0, 0.0)) -> np.ndarray:
    shift = np.asarray(shift, dtype=float)
    return amp * np.exp(-width * np.sum((grid.nodes - shift) ** 2, axis=1))
