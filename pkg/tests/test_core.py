"""Grid, quadrature, containers, and integral primitives."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radgas.core import (
    FullState,
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

from conftest import gaussian

# independent 1-d sums for exp(-|v|^2) on the N=8, L=3.5 axis, cubed
GAUSS_MASS_N8 = 5.5666000753402225
GAUSS_L12_N8 = 13.933551429557542


class TestVelocityGrid:
    def test_axis_symmetric_bitwise(self):
        for n, half in ((6, 3.0), (7, 2.5), (16, 3.5)):
            grid = VelocityGrid(n, half)
            assert np.array_equal(grid.axis, -grid.axis[::-1])

    def test_spacing_and_volume(self):
        grid = VelocityGrid(8, 3.5)
        assert grid.spacing == 1.0
        assert grid.cell_volume == 1.0
        assert grid.size == 512

    def test_nodes_c_order(self):
        grid = VelocityGrid(5, 2.0)
        # index (ix*n + iy)*n + iz, spacing exactly 1.0 here
        assert grid.nodes[1, 2] != grid.nodes[0, 2]
        assert np.array_equal(grid.nodes[1] - grid.nodes[0],
                              [0.0, 0.0, grid.spacing])

    def test_moment_weight_range(self):
        grid = VelocityGrid(4, 2.0)
        with pytest.raises(ValueError):
            grid.moment_weight(5)
        assert np.array_equal(grid.moment_weight(0), np.ones(grid.size))
        assert np.allclose(grid.moment_weight(4), (1.0 + grid.r2) ** 2)

    def test_validation(self):
        with pytest.raises(ValueError):
            VelocityGrid(1, 3.0)
        with pytest.raises(ValueError):
            VelocityGrid(8, 0.0)


class TestSphereDesign:
    def test_measure_one(self, quad):
        assert abs(quad.weights.sum() - 1.0) < 1e-15

    def test_antipodal_interleaving(self, quad):
        assert np.array_equal(quad.nodes[1::2], -quad.nodes[0::2])
        assert quad.antipodal_reps is not None
        assert quad.antipodal_reps.size == 16

    def test_polynomial_exactness(self, quad):
        # uniform-measure moments: x^2 -> 1/3, x^4 -> 1/5, x^2 y^2 -> 1/15,
        # odd monomials -> 0; the rule is a degree-5 design
        x, y = quad.nodes[:, 0], quad.nodes[:, 1]
        assert abs(integrate_sphere(x**2, quad) - 1.0 / 3.0) < 1e-14
        assert abs(integrate_sphere(x**4, quad) - 1.0 / 5.0) < 1e-14
        assert abs(integrate_sphere(x**2 * y**2, quad) - 1.0 / 15.0) < 1e-14
        for mono in (x, x**3, x**2 * y, x * y * quad.nodes[:, 2]):
            assert abs(integrate_sphere(mono, quad)) < 1e-15

    def test_rejects_bad_nodes(self):
        with pytest.raises(ValueError):
            SphereQuadrature(np.array([[2.0, 0.0, 0.0]]), np.array([1.0]))
        with pytest.raises(ValueError):
            SphereQuadrature(np.array([[1.0, 0.0, 0.0]]), np.array([0.5]))


class TestIntegrals:
    def test_gaussian_mass_oracle(self):
        grid = VelocityGrid(8, 3.5)
        val = integrate_velocity(np.exp(-grid.r2), grid)
        assert abs(val - GAUSS_MASS_N8) < 1e-13 * GAUSS_MASS_N8

    def test_gaussian_weighted_oracle(self):
        grid = VelocityGrid(8, 3.5)
        val = l1k_norm(np.exp(-grid.r2), grid, 2)
        assert abs(val - GAUSS_L12_N8) < 1e-13 * GAUSS_L12_N8

    def test_shape_checks(self, grid6, quad):
        with pytest.raises(ValueError):
            integrate_velocity(np.zeros(5), grid6)
        with pytest.raises(ValueError):
            integrate_sphere(np.zeros(5), quad)
        bad = np.zeros(grid6.size)
        bad[0] = np.inf
        with pytest.raises(ValueError):
            integrate_velocity(bad, grid6)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
    def test_linearity(self, seed, a, b):
        grid = VelocityGrid(5, 2.0)
        rng = np.random.default_rng(seed)
        f = rng.normal(size=grid.size)
        g = rng.normal(size=grid.size)
        lhs = integrate_velocity(a * f + b * g, grid, 2)
        rhs = a * integrate_velocity(f, grid, 2) + b * integrate_velocity(g, grid, 2)
        assert abs(lhs - rhs) <= 1e-10 * (1.0 + abs(lhs) + abs(rhs))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_l1k_triangle(self, seed):
        grid = VelocityGrid(5, 2.0)
        rng = np.random.default_rng(seed)
        f = rng.normal(size=grid.size)
        g = rng.normal(size=grid.size)
        assert l1k_norm(f + g, grid, 2) <= (
            l1k_norm(f, grid, 2) + l1k_norm(g, grid, 2) + 1e-12
        )


class TestStates:
    def test_compose_balanced(self, grid6, quad):
        f = gaussian(grid6)
        m = ManifoldState(lam=0.4, f=f)
        full = compose(m, zero_remainder(grid6, quad))
        assert np.array_equal(full.f1, f)
        assert np.allclose(full.f2, 0.4 * f, rtol=0, atol=0)
        assert np.allclose(full.q, 0.4 / 0.6)

    def test_compose_offsets(self, grid6, quad):
        f = gaussian(grid6)
        alpha = 0.1 * gaussian(grid6, width=2.0)
        theta = np.full(quad.size, integrate_velocity(alpha, grid6))
        m = ManifoldState(lam=0.2, f=f)
        full = compose(m, Remainder(alpha=alpha, theta=theta))
        assert np.allclose(full.f1, f + alpha)
        assert np.allclose(full.f2, 0.2 * f - alpha)
        assert np.allclose(full.q, 0.25 + theta)

    def test_lam_domain(self, grid6):
        with pytest.raises(ValueError):
            ManifoldState(lam=1.0, f=np.ones(grid6.size))
        with pytest.raises(ValueError):
            ManifoldState(lam=-0.1, f=np.ones(grid6.size))

    def test_remainder_norm_consistent(self, grid6, quad):
        alpha = gaussian(grid6, amp=0.3, width=1.5)
        theta = 0.2 * np.ones(quad.size)
        w = Remainder(alpha=alpha, theta=theta)
        direct = state_norm(alpha, -alpha, theta, grid6, quad)
        assert abs(remainder_norm(w, grid6, quad) - direct) < 1e-12 * direct

    def test_full_state_min_value(self, grid6, quad):
        st_ = FullState(
            f1=np.ones(grid6.size),
            f2=np.full(grid6.size, 2.0),
            q=np.full(quad.size, -3.0),
        )
        assert st_.min_value() == -3.0

    def test_rejects_nonfinite(self, grid6, quad):
        bad = np.ones(grid6.size)
        bad[3] = np.nan
        with pytest.raises(ValueError):
            FullState(f1=bad, f2=np.ones(grid6.size), q=np.ones(quad.size))


class TestParams:
    def test_defaults(self):
        p = Params()
        assert p.eps0 == 0.5 and p.a0 == 1.0 and p.b0 == 1.0

    def test_validation(self):
        with pytest.raises(ValueError):
            Params(eps0=0.0)
        with pytest.raises(ValueError):
            Params(eps_scale=-1.0)
        with pytest.raises(ValueError):
            Params(a0=-0.5)
        with pytest.raises(ValueError):
            Params(tol_newton=0.0)


def test_sphere_l1(quad):
    field = np.linspace(-1.0, 1.0, quad.size)
    assert sphere_l1_norm(field, quad) == pytest.approx(
        integrate_sphere(np.abs(field), quad)
    )


def test_norm_weights_order():
    grid = VelocityGrid(6, 3.0)
    f = gaussian(grid)
    assert l1k_norm(f, grid, 0) < l1k_norm(f, grid, 2) < l1k_norm(f, grid, 4)
    assert math.isclose(l1k_norm(f, grid, 0), integrate_velocity(f, grid))
