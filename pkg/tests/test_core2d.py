import numpy as np
import pytest

from dgfv import basis, core2d, euler, mesh2d
from dgfv.errors import TelescopingClosureError
from dgfv.euler import GasModel, flux_average, flux_chandrashekar, flux_llf, physical_flux

GAS = GasModel()


def cartesian(kind=basis.GAUSS, degree=3, k=4):
    ops = basis.make_operators(kind, degree)
    return mesh2d.build_cartesian_mesh(k, k, (-1, 1, -1, 1), ops)


def warped(kind=basis.GAUSS, degree=3, k=4, amp=0.06):
    ops = basis.make_operators(kind, degree)
    return mesh2d.build_warped_mesh(k, k, (-1, 1, -1, 1), ops, amp)


def constant_state(mesh, rho=1.3, vx=0.4, vy=-0.2, p=0.8):
    shape = mesh.x.shape
    return euler.prim_to_cons(
        np.full(shape, rho), np.stack([np.full(shape, vx), np.full(shape, vy)]),
        np.full(shape, p), GAS,
    )


def wavy_state(mesh, seed=0):
    rng = np.random.default_rng(seed)
    rho = 1.0 + 0.3 * np.sin(np.pi * mesh.x) * np.sin(np.pi * mesh.y)
    vx = 0.4 * np.cos(np.pi * mesh.x) + 0.05 * rng.standard_normal(mesh.x.shape)
    vy = -0.3 * np.sin(np.pi * mesh.y)
    p = 1.0 + 0.2 * np.cos(np.pi * mesh.x) * np.cos(np.pi * mesh.y)
    return euler.prim_to_cons(rho, np.stack([vx, vy]), p, GAS)


class TestFaceProjection:
    def test_constant_field(self):
        mesh = cartesian()
        u = constant_state(mesh)
        for face in core2d.entropy_project_faces_2d(u, mesh.ops, GAS):
            assert np.max(np.abs(face - u[:, :, :, 0, 0][..., None])) < 1e-13

    def test_lobatto_faces_are_boundary_nodes(self):
        mesh = cartesian(basis.GAUSS_LOBATTO)
        u = wavy_state(mesh)
        uw, ue, us, un = core2d.entropy_project_faces_2d(u, mesh.ops, GAS)
        assert uw == pytest.approx(u[:, :, :, 0, :], rel=1e-12)
        assert ue == pytest.approx(u[:, :, :, -1, :], rel=1e-12)
        assert us == pytest.approx(u[:, :, :, :, 0], rel=1e-12)
        assert un == pytest.approx(u[:, :, :, :, -1], rel=1e-12)

    def test_tensor_linear_entropy_field_is_exact(self):
        mesh = cartesian(degree=3, k=1)
        ref = euler.cons_to_entropy(euler.prim_to_cons(1.0, [0.2, -0.1], 1.0, GAS), GAS)
        sx = np.array([0.04, -0.01, 0.02, 0.01])
        xi = mesh.ops.rule.nodes
        v = ref[:, None, None] + sx[:, None, None] * (xi[:, None] + 0.5 * xi[None, :])
        u = euler.entropy_to_cons(v[:, None, None, :, :], GAS)
        uw, ue, us, un = core2d.entropy_project_faces_2d(u, mesh.ops, GAS)
        v_w = ref[:, None] + sx[:, None] * (-1.0 + 0.5 * xi[None, :])
        v_e = ref[:, None] + sx[:, None] * (+1.0 + 0.5 * xi[None, :])
        assert uw[:, 0, 0, :] == pytest.approx(euler.entropy_to_cons(v_w, GAS), rel=1e-12)
        assert ue[:, 0, 0, :] == pytest.approx(euler.entropy_to_cons(v_e, GAS), rel=1e-12)


class TestTelescoping2D:
    def test_constant_state_carries_metric_scaled_flux(self):
        mesh = cartesian(k=4)
        u = constant_state(mesh)
        faces = core2d.exchange_and_flux(mesh, u, GAS, flux_llf)
        fbar1, resid = core2d.telescoping_fluxes_dir(mesh, u, faces, 1, flux_chandrashekar, GAS)
        dy2 = 0.5 * (2.0 / 4)
        fref = physical_flux(u[:, 0, 0, 0, 0], np.array([1.0, 0.0]), GAS) * dy2
        assert resid < 1e-13
        assert fbar1 == pytest.approx(
            np.broadcast_to(fref[:, None, None, None, None], fbar1.shape), rel=1e-12
        )

    @pytest.mark.parametrize("kind", [basis.GAUSS, basis.GAUSS_LOBATTO])
    def test_closure_on_warped_mesh(self, kind):
        mesh = warped(kind)
        u = wavy_state(mesh)
        faces = core2d.exchange_and_flux(mesh, u, GAS, flux_llf)
        for direction in (1, 2):
            _, resid = core2d.telescoping_fluxes_dir(
                mesh, u, faces, direction, flux_chandrashekar, GAS
            )
            assert resid < 1e-11

    def test_asymmetric_volume_flux_rejected(self):
        mesh = warped()
        u = wavy_state(mesh)
        faces = core2d.exchange_and_flux(mesh, u, GAS, flux_llf)
        bad = lambda a, b, n, gas: physical_flux(a, n, gas)
        with pytest.raises(TelescopingClosureError):
            core2d.telescoping_fluxes_dir(mesh, u, faces, 1, bad, GAS)

    def test_direction_symmetry_under_transposition(self):
        mesh = cartesian(k=3)
        rho = 1.0 + 0.3 * np.sin(np.pi * mesh.x) * np.sin(np.pi * mesh.y)
        u = euler.prim_to_cons(
            rho, np.zeros((2,) + rho.shape), 1.0 + 0.5 * rho, GAS
        )
        faces = core2d.exchange_and_flux(mesh, u, GAS, flux_llf)
        g1, _ = core2d.telescoping_fluxes_dir(mesh, u, faces, 1, flux_chandrashekar, GAS)
        g2, _ = core2d.telescoping_fluxes_dir(mesh, u, faces, 2, flux_chandrashekar, GAS)
        g2t = g2.swapaxes(1, 2).swapaxes(3, 4)
        assert np.max(np.abs(g1[0] - g2t[0])) < 1e-13
        assert np.max(np.abs(g1[3] - g2t[3])) < 1e-12


class TestRhs2D:
    @pytest.mark.parametrize("kind", [basis.GAUSS, basis.GAUSS_LOBATTO])
    def test_free_stream_on_warped_mesh(self, kind):
        mesh = warped(kind)
        u = constant_state(mesh)
        dudt = core2d.rhs_2d(mesh, u, GAS, flux_chandrashekar, flux_chandrashekar)
        assert np.max(np.abs(dudt)) < 1e-12

    def test_free_stream_with_average_volume_flux(self):
        mesh = warped()
        u = constant_state(mesh)
        dudt = core2d.rhs_2d(mesh, u, GAS, flux_average, flux_llf)
        assert np.max(np.abs(dudt)) < 1e-12

    def test_global_conservation(self):
        mesh = warped()
        u = wavy_state(mesh)
        dudt = core2d.rhs_2d(mesh, u, GAS, flux_chandrashekar, flux_llf)
        assert np.max(np.abs(mesh.totals(dudt))) < 1e-13

    def test_entropy_conserved_with_ec_interface_fluxes(self):
        mesh = warped()
        u = wavy_state(mesh)
        dudt = core2d.rhs_2d(mesh, u, GAS, flux_chandrashekar, flux_chandrashekar)
        assert abs(core2d.entropy_production(mesh, u, dudt, GAS)) < 1e-11

    def test_entropy_dissipated_with_llf_interface_fluxes(self):
        for seed in range(5):
            mesh = warped()
            u = wavy_state(mesh, seed=seed)
            dudt = core2d.rhs_2d(mesh, u, GAS, flux_chandrashekar, flux_llf)
            assert core2d.entropy_production(mesh, u, dudt, GAS) <= 1e-13

    def test_rhs_truncation_decays_with_resolution(self):
        # Nodal truncation against the exact transport of the diagonal wave.
        errs = []
        for k in (3, 6, 12):
            mesh = cartesian(degree=2, k=k)
            rho = 2.0 + np.sin(np.pi * (mesh.x + mesh.y))
            u = euler.prim_to_cons(rho, np.ones((2,) + rho.shape), np.ones_like(rho), GAS)
            dudt = core2d.rhs_2d(mesh, u, GAS, flux_chandrashekar, flux_llf, "interp")
            rp = np.pi * np.cos(np.pi * (mesh.x + mesh.y))
            exact = -np.stack([2.0 * rp, 2.0 * rp, 2.0 * rp, 2.0 * rp])
            errs.append(mesh.l2_norm(dudt[0] - exact[0]))
        slope = np.polyfit(np.log([2 / 3, 1 / 3, 1 / 6]), np.log(errs), 1)[0]
        assert slope >= 1.7
