import numpy as np
import pytest
import scipy.linalg as sla
from scipy.optimize import brentq
from scipy.special import jv, jvp

import dynheat as dh

from conftest import unit_random_state


class TestGridWeights:
    def test_interval_bulk_weights_are_trapezoid(self, iv_domain):
        grid = dh.build_grid(iv_domain, n=11)
        dx = 0.1
        assert grid.w_bulk[0] == pytest.approx(dx / 2)
        assert grid.w_bulk[-1] == pytest.approx(dx / 2)
        assert np.all(grid.w_bulk[1:-1] == pytest.approx(dx))
        assert grid.w_bulk.sum() == pytest.approx(1.0, abs=1e-15)

    def test_interval_trace_weights_are_unit_atoms(self, iv_domain):
        grid = dh.build_grid(iv_domain, n=11)
        assert grid.w_trace[grid.boundary_idx] == pytest.approx([1.0, 1.0])
        assert np.all(grid.w_trace[grid.interior_idx] == 0.0)

    def test_norm_of_ones_is_total_measure(self, iv_ops, disk_ops):
        # ||1||^2 = |Omega| + |Gamma|: 1 + 2 on the interval
        ones = np.ones(iv_ops.n_dofs)
        assert iv_ops.inner(ones, ones) == pytest.approx(3.0, rel=1e-14)
        ones_d = np.ones(disk_ops.n_dofs)
        assert disk_ops.inner(ones_d, ones_d) == pytest.approx(
            np.pi + 2.0 * np.pi, rel=1e-12)

    def test_disk_weights_sum_to_area_and_perimeter(self, disk_domain):
        grid = dh.build_grid(disk_domain, nr=9, ntheta=20)
        assert grid.w_bulk.sum() == pytest.approx(np.pi, rel=1e-12)
        assert grid.w_trace.sum() == pytest.approx(2.0 * np.pi, rel=1e-14)

    def test_omega_nodes_lie_inside_omega(self, iv_domain):
        grid = dh.build_grid(iv_domain, n=21)
        xs = grid.points[grid.omega_idx, 0]
        assert np.all((xs >= 0.3) & (xs <= 0.7))
        assert grid.omega_idx.size > 0

    def test_resolution_floor_enforced(self, iv_domain, disk_domain):
        with pytest.raises(dh.ConfigurationError):
            dh.build_grid(iv_domain, n=3)
        with pytest.raises(dh.ConfigurationError):
            dh.build_grid(disk_domain, nr=1, ntheta=8)
        with pytest.raises(dh.ConfigurationError):
            dh.build_grid(disk_domain, nr=4, ntheta=3)

    def test_grid_arrays_are_read_only(self, iv_domain):
        grid = dh.build_grid(iv_domain, n=8)
        with pytest.raises(ValueError):
            grid.points[0, 0] = 99.0
        with pytest.raises(ValueError):
            grid.w_bulk[0] = 99.0


class TestState:
    def test_from_parts_requires_matching_trace(self, iv_small_ops):
        grid = iv_small_ops.grid
        bulk = np.zeros(grid.n_dofs)
        trace = np.ones(grid.boundary_idx.size)
        with pytest.raises(dh.UsageError):
            dh.State.from_parts(grid, bulk, trace)
        bulk[grid.boundary_idx] = 1.0
        st = dh.State.from_parts(grid, bulk, trace)
        assert st.trace == pytest.approx(trace)

    def test_from_function_samples_points(self, iv_small_ops):
        grid = iv_small_ops.grid
        st = dh.State.from_function(grid, lambda p: p[:, 0] ** 2)
        assert st.values == pytest.approx(grid.points[:, 0] ** 2)

    def test_random_is_seeded(self, iv_small_ops):
        grid = iv_small_ops.grid
        a = dh.State.random(grid, np.random.default_rng(5))
        b = dh.State.random(grid, np.random.default_rng(5))
        assert a.values == pytest.approx(b.values)


class TestOperatorStructure:
    def test_constants_are_annihilated_exactly(self, iv_ops, disk_ops):
        for ops in (iv_ops, disk_ops):
            out = ops.apply_A(np.ones(ops.n_dofs))
            assert np.all(out == 0.0)

    def test_mass_self_adjointness(self, iv_ops, disk_ops):
        rng = np.random.default_rng(7)
        for ops in (iv_ops, disk_ops):
            u = rng.standard_normal(ops.n_dofs)
            v = rng.standard_normal(ops.n_dofs)
            lhs = ops.inner(ops.apply_A(u), v)
            rhs = ops.inner(u, ops.apply_A(v))
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)

    def test_dissipativity(self, iv_ops, disk_ops):
        rng = np.random.default_rng(8)
        for ops in (iv_ops, disk_ops):
            for _ in range(20):
                u = rng.standard_normal(ops.n_dofs)
                assert ops.inner(ops.apply_A(u), u) <= 1e-12 * ops.inner(u, u)

    def test_quadratic_form_matches_dirichlet_form(self, iv_ops, disk_ops):
        rng = np.random.default_rng(9)
        for ops in (iv_ops, disk_ops):
            u = rng.standard_normal(ops.n_dofs)
            lhs = float(u @ ops.apply_K(u))
            assert lhs == pytest.approx(ops.dirichlet_form(u, u), rel=1e-12)

    def test_interval_stencil_against_literal_second_difference(self, iv_domain):
        """Oracle: interior rows of K act as (2u_i - u_{i-1} - u_{i+1})/dx."""
        grid = dh.build_grid(iv_domain, n=9)
        ops = dh.assemble_operator(grid)
        dx = grid.spacing[0]
        rng = np.random.default_rng(10)
        u = rng.standard_normal(grid.n_dofs)
        ku = ops.apply_K(u)
        for i in range(1, grid.n_dofs - 1):
            expect = (2.0 * u[i] - u[i - 1] - u[i + 1]) / dx
            assert ku[i] == pytest.approx(expect, rel=1e-13, abs=1e-13)
        assert ku[0] == pytest.approx((u[0] - u[1]) / dx, rel=1e-13)
        assert ku[-1] == pytest.approx((u[-1] - u[-2]) / dx, rel=1e-13)


class TestSpectrumAgainstContinuum:
    """The coupled bulk/boundary eigenvalues have closed transcendental
    characterizations; the assembled operator must reproduce them."""

    def test_interval_eigenvalues(self, iv_domain):
        # antisymmetric tan(k/2) = 1/k; symmetric tan(k/2) = -k
        k0 = brentq(lambda k: np.tan(k / 2) - 1.0 / k, 0.5, np.pi - 1e-9)
        k1 = brentq(lambda k: np.tan(k / 2) + k, np.pi + 1e-6, 2 * np.pi - 1e-6)
        ops = dh.assemble_operator(dh.build_grid(iv_domain, n=100))
        ev = _symmetrized_spectrum(ops)
        assert abs(ev[0]) < 1e-10
        assert ev[1] == pytest.approx(k0 ** 2, rel=1e-4)
        assert ev[2] == pytest.approx(k1 ** 2, rel=1e-3)

    def test_disk_eigenvalues(self, disk_domain):
        # angular family m: k Jm'(k) = (k^2 - m^2) Jm(k) on the unit disk
        def bessel_root(m, lo, hi):
            return brentq(lambda k: k * jvp(m, k) - (k * k - m * m) * jv(m, k),
                          lo, hi)

        lam1 = bessel_root(1, 0.2, 1.84) ** 2
        lam2 = bessel_root(2, 0.5, 3.05) ** 2
        lam0 = bessel_root(0, 2.5, 3.83) ** 2
        ops = dh.assemble_operator(
            dh.build_grid(dh.DomainSpec.disk((0.0, 0.0), 1.0, (0.0, 0.0),
                                             (0.0, 0.0), 0.5), nr=16, ntheta=32))
        ev = _symmetrized_spectrum(ops)
        assert abs(ev[0]) < 1e-10
        # rotational symmetry doubles every m >= 1 mode
        assert ev[1] == pytest.approx(ev[2], rel=1e-10)
        assert ev[1] == pytest.approx(lam1, rel=2e-2)
        assert ev[3] == pytest.approx(ev[4], rel=1e-10)
        assert ev[3] == pytest.approx(lam2, rel=2e-2)
        assert ev[5] == pytest.approx(lam0, rel=2e-2)


def _symmetrized_spectrum(ops):
    m = ops.mass
    L = -ops.dense_A()
    Lsym = np.sqrt(m)[:, None] * L / np.sqrt(m)[None, :]
    return np.sort(sla.eigvalsh(0.5 * (Lsym + Lsym.T)))


class TestOmegaRestriction:
    def test_restrict_embed_round_trip(self, iv_small_ops):
        rng = np.random.default_rng(11)
        u = rng.standard_normal(iv_small_ops.n_dofs)
        r = iv_small_ops.restrict_omega(u)
        back = iv_small_ops.embed_omega(r)
        assert back.values[iv_small_ops.grid.omega_idx] == pytest.approx(r)
        mask = np.ones(iv_small_ops.n_dofs, dtype=bool)
        mask[iv_small_ops.grid.omega_idx] = False
        assert np.all(back.values[mask] == 0.0)

    def test_omega_norm_is_bulk_measure_of_patch(self, iv_small_ops):
        u = np.ones(iv_small_ops.n_dofs)
        r = iv_small_ops.restrict_omega(u)
        expect = iv_small_ops.grid.w_bulk[iv_small_ops.grid.omega_idx].sum()
        assert iv_small_ops.norm_omega(r) ** 2 == pytest.approx(expect)

    def test_shape_mismatch_errors(self, iv_small_ops):
        with pytest.raises(dh.UsageError):
            iv_small_ops.norm_omega(np.ones(iv_small_ops.n_dofs))
        with pytest.raises(dh.UsageError):
            iv_small_ops.embed_omega(np.ones(3))


class TestUnitRandomHelper:
    def test_unit_norm(self, iv_ops):
        st = unit_random_state(iv_ops, 3)
        assert iv_ops.norm(st) == pytest.approx(1.0, rel=1e-14)
