import numpy as np
import pytest

from dgfv import basis, core1d, euler
from dgfv.core1d import Element1D, PeriodicLine1D
from dgfv.errors import TelescopingClosureError
from dgfv.euler import (
    GasModel,
    flux_average,
    flux_chandrashekar,
    flux_llf,
    physical_flux,
)

from conftest import random_state

GAS = GasModel()


def asymmetric_flux(uL, uR, n, gas):
    # Deliberately violates the two-point symmetry the closure proof needs.
    return physical_flux(uL, n, gas)


def smooth_random_line(kind, degree, num_elements, seed=0):
    rng = np.random.default_rng(seed)
    ops = basis.make_operators(kind, degree)
    line = PeriodicLine1D(ops, num_elements)
    rho = 1.0 + 0.4 * np.sin(np.pi * line.x) + 0.05 * rng.standard_normal(line.x.shape)
    vel = 0.3 * np.cos(np.pi * line.x) + 0.05 * rng.standard_normal(line.x.shape)
    p = 1.0 + 0.3 * np.sin(2 * np.pi * line.x + 0.4)
    return line, euler.prim_to_cons(rho, vel[None], p, GAS)


def constant_line(kind, degree, num_elements=4):
    ops = basis.make_operators(kind, degree)
    line = PeriodicLine1D(ops, num_elements)
    shape = line.x.shape
    u = euler.prim_to_cons(
        np.full(shape, 1.2), np.full((1,) + shape, 0.4), np.full(shape, 0.9), GAS
    )
    return line, u


def single_element(line, u, index=0):
    return Element1D(line.ops, line.jac, u[:, index, :], gas=line.gas)


class TestEntropyProjection:
    def test_constant_state_projects_to_itself(self):
        line, u = constant_line(basis.GAUSS, 4)
        elem = single_element(line, u)
        utL, utR = core1d.entropy_project_faces(elem)
        assert utL == pytest.approx(u[:, 0, 0], rel=1e-13)
        assert utR == pytest.approx(u[:, 0, 0], rel=1e-13)

    def test_lobatto_projection_is_nodal_selection(self):
        line, u = smooth_random_line(basis.GAUSS_LOBATTO, 3, 4)
        elem = single_element(line, u)
        utL, utR = core1d.entropy_project_faces(elem)
        assert utL == pytest.approx(u[:, 0, 0], rel=1e-13)
        assert utR == pytest.approx(u[:, 0, -1], rel=1e-13)

    def test_linear_entropy_variables_interpolate_exactly(self):
        ops = basis.make_operators(basis.GAUSS, 3)
        line = PeriodicLine1D(ops, 1)
        # Build a state whose entropy variables are affine in x.
        ref = euler.cons_to_entropy(euler.prim_to_cons(1.0, [0.3], 1.0, GAS), GAS)
        slope = np.array([0.05, -0.02, 0.01])
        xi = ops.rule.nodes
        v_nodal = ref[:, None] + slope[:, None] * xi[None, :]
        u = euler.entropy_to_cons(v_nodal, GAS)
        elem = Element1D(ops, line.jac, u, gas=GAS)
        utL, utR = core1d.entropy_project_faces(elem)
        assert utL == pytest.approx(euler.entropy_to_cons(ref - slope, GAS), rel=1e-12)
        assert utR == pytest.approx(euler.entropy_to_cons(ref + slope, GAS), rel=1e-12)


class TestFreeStream:
    @pytest.mark.parametrize("kind", [basis.GAUSS, basis.GAUSS_LOBATTO])
    @pytest.mark.parametrize("path", ["matrix", "staggered"])
    def test_constant_state_is_steady(self, kind, path):
        line, u = constant_line(kind, 3)
        dudt = line.rhs(u, flux_chandrashekar, flux_chandrashekar, path=path)
        assert np.max(np.abs(dudt)) < 1e-13

    def test_staggered_fluxes_all_equal_physical_flux(self):
        line, u = constant_line(basis.GAUSS, 3)
        fL, fR = line.interface_fluxes(u, flux_chandrashekar)
        elem = single_element(line, u)
        fbar = core1d.telescoping_fluxes(elem, fL[:, 0], fR[:, 0], flux_chandrashekar)
        expected = physical_flux(u[:, 0, 0], 1.0, GAS)
        assert fbar == pytest.approx(np.tile(expected[:, None], (1, 5)), rel=1e-13)


class TestFormulationEquivalence:
    @pytest.mark.parametrize("degree", [1, 2, 3, 4, 5])
    def test_matrix_vs_staggered_on_random_elements(self, degree):
        # 100 random elements per degree, both paths, quadrature L2 gap.
        line, u = smooth_random_line(basis.GAUSS, degree, 100, seed=degree)
        ra = line.rhs(u, flux_chandrashekar, flux_llf, path="matrix")
        rb = line.rhs(u, flux_chandrashekar, flux_llf, path="staggered")
        gap = np.sqrt(np.sum(line.jac * line.ops.rule.weights * (ra - rb) ** 2))
        assert gap < 1e-12

    def test_local_conservation(self):
        line, u = smooth_random_line(basis.GAUSS, 4, 6)
        fL, fR = line.interface_fluxes(u, flux_llf)
        elem = single_element(line, u, index=2)
        fbar = core1d.telescoping_fluxes(elem, fL[:, 2], fR[:, 2], flux_chandrashekar)
        dudt = core1d.fv_rhs(fbar, elem)
        total = np.sum(line.jac * line.ops.rule.weights * dudt, axis=1)
        assert total == pytest.approx(fbar[:, 0] - fbar[:, -1], rel=1e-13, abs=1e-14)

    def test_constant_staggered_fluxes_give_zero_update(self):
        line, u = constant_line(basis.GAUSS, 3)
        elem = single_element(line, u)
        fbar = np.tile(physical_flux(u[:, 0, 0], 1.0, GAS)[:, None], (1, 5))
        assert np.max(np.abs(core1d.fv_rhs(fbar, elem))) == 0.0


class TestClosure:
    @pytest.mark.parametrize("mode", ["entropy", "interp"])
    def test_symmetric_flux_closes(self, mode):
        line, u = smooth_random_line(basis.GAUSS, 4, 6)
        fL, fR = line.interface_fluxes(u, flux_llf, mode)
        elem = single_element(line, u)
        resid = core1d.verify_closure(elem, fL[:, 0], fR[:, 0], flux_chandrashekar, mode)
        assert resid < 1e-12

    def test_asymmetric_flux_breaks_closure(self):
        line, u = smooth_random_line(basis.GAUSS, 4, 6)
        fL, fR = line.interface_fluxes(u, flux_llf)
        elem = single_element(line, u)
        resid = core1d.verify_closure(elem, fL[:, 0], fR[:, 0], asymmetric_flux)
        assert resid > 1e-3
        with pytest.raises(TelescopingClosureError):
            core1d.telescoping_fluxes(elem, fL[:, 0], fR[:, 0], asymmetric_flux)

    def test_average_volume_flux_also_closes(self):
        line, u = smooth_random_line(basis.GAUSS, 3, 6)
        fL, fR = line.interface_fluxes(u, flux_llf)
        elem = single_element(line, u)
        assert core1d.verify_closure(elem, fL[:, 0], fR[:, 0], flux_average) < 1e-12


class TestLobattoOracle:
    def _splitform_lgl_rhs(self, line, u, volume_flux, interface_flux):
        # Independent reference: classical Lobatto flux-differencing RHS with
        # boundary corrections, assembled directly from D and the SATs.
        ops = line.ops
        npts = ops.rule.degree + 1
        w = ops.rule.weights
        fstar_L, fstar_R = line.interface_fluxes(u, interface_flux, "interp")
        out = np.empty_like(u)
        for e in range(line.num_elements):
            vol = np.zeros((u.shape[0], npts))
            for i in range(npts):
                for k in range(npts):
                    vol[:, i] += 2.0 * ops.D[i, k] * volume_flux(
                        u[:, e, i], u[:, e, k], 1.0, line.gas
                    )
            f0 = physical_flux(u[:, e, 0], 1.0, line.gas)
            fn = physical_flux(u[:, e, -1], 1.0, line.gas)
            vol[:, 0] += (f0 - fstar_L[:, e]) / w[0]
            vol[:, -1] += (fstar_R[:, e] - fn) / w[-1]
            out[:, e, :] = -vol / line.jac
        return out

    def test_staggered_path_matches_splitform_reference(self):
        line, u = smooth_random_line(basis.GAUSS_LOBATTO, 3, 5)
        got = line.rhs(u, flux_chandrashekar, flux_llf, path="staggered", face_mode="interp")
        ref = self._splitform_lgl_rhs(line, u, flux_chandrashekar, flux_llf)
        assert np.max(np.abs(got - ref)) < 1e-12 * max(1.0, np.max(np.abs(ref)))


class TestEntropyBalance:
    def test_entropy_conserved_with_ec_interface_flux(self):
        line, u = smooth_random_line(basis.GAUSS, 3, 8)
        dudt = line.rhs(u, flux_chandrashekar, flux_chandrashekar)
        assert abs(line.entropy_production(u, dudt)) < 1e-12

    def test_entropy_dissipated_with_llf_interface_flux(self):
        line, u = smooth_random_line(basis.GAUSS, 3, 8)
        dudt = line.rhs(u, flux_chandrashekar, flux_llf)
        assert line.entropy_production(u, dudt) <= 1e-13

    def test_totals_conserved_per_evaluation(self):
        line, u = smooth_random_line(basis.GAUSS, 4, 8)
        dudt = line.rhs(u, flux_chandrashekar, flux_llf)
        assert np.max(np.abs(np.sum(line.jac * line.ops.rule.weights * dudt, axis=(1, 2)))) < 1e-13


class TestTruncation:
    def test_rhs_truncation_decays_at_design_order(self):
        # Nodal RHS truncation against the analytic flux divergence decays at
        # order N (solution error carries the extra order; see the
        # convergence acceptance test).
        degree = 3
        errs = []
        for k in (8, 16, 32):
            ops = basis.make_operators(basis.GAUSS, degree)
            line = PeriodicLine1D(ops, k)
            rho = 2.0 + np.sin(np.pi * line.x)
            u = euler.prim_to_cons(rho, np.ones_like(rho)[None], np.ones_like(rho), GAS)
            dudt = line.rhs(u, flux_chandrashekar, flux_llf)
            rp = np.pi * np.cos(np.pi * line.x)
            exact = -np.stack([rp, rp, 0.5 * rp])
            errs.append(np.sqrt(np.sum(line.jac * ops.rule.weights * (dudt - exact) ** 2)))
        slope = np.polyfit(np.log([0.25, 0.125, 0.0625]), np.log(errs), 1)[0]
        assert slope >= degree - 0.3


class TestElementValidation:
    def test_unphysical_element_rejected(self):
        ops = basis.make_operators(basis.GAUSS, 2)
        u = np.array([[1.0, -1.0, 1.0], [0.0, 0.0, 0.0], [2.5, 2.5, 2.5]])
        from dgfv.errors import UnphysicalStateError

        with pytest.raises(UnphysicalStateError):
            Element1D(ops, 0.5, u, gas=GAS)

    def test_nonpositive_jacobian_rejected(self):
        ops = basis.make_operators(basis.GAUSS, 2)
        u = random_state(np.random.default_rng(0), (3,), gas=GAS)
        with pytest.raises(ValueError):
            Element1D(ops, -0.5, u, gas=GAS)
