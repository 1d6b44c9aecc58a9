"""Shape model tests: state solves, objectives, derivative functionals."""

import numpy as np
import pytest

from shapeflow import fem, fixtures, models
from shapeflow.mesh import enclosed_measure

DISK_LAMBDA1 = 18.168414535537227  # pi * j_{0,1}^2 for the unit-area disk


def smooth_direction(mesh) -> np.ndarray:
    x, y = mesh.vertices[:, 0], mesh.vertices[:, 1]
    return np.column_stack(
        [np.sin(x + 0.3) * np.cos(y), np.cos(0.5 * x) * np.sin(y - 0.2)]
    )


class TestReconstruction:
    def test_zero_data_gives_zero_fields(self):
        zero = lambda x, y: np.zeros_like(x)
        zero_grad = lambda x, y: np.zeros(x.shape + (2,))
        model = models.ReconstructionModel(zero, zero_grad, zero)
        mesh = fixtures.graded_disk()
        state = model.solve(mesh)
        assert np.abs(state["u"]).max() == 0.0
        assert np.abs(state["p"]).max() == 0.0
        assert model.objective(mesh, state) == 0.0
        g = model.gradient(mesh, state)
        assert abs(g.pair(smooth_direction(mesh))) <= 1e-14

    def test_manufactured_second_order_convergence(self):
        exact = lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y)
        f = lambda x, y: (2.0 * np.pi**2 + 1.0) * exact(x, y)
        zero_grad = lambda x, y: np.zeros(x.shape + (2,))
        model = models.ReconstructionModel(exact, zero_grad, f)
        errors = []
        for n in (8, 16, 32):
            mesh = fixtures.structured_square(n)
            u = model.solve(mesh)["u"]
            e = u - exact(mesh.vertices[:, 0], mesh.vertices[:, 1])
            M = fem.mass_matrix(fem.p1_space(mesh)).matrix
            errors.append(float(np.sqrt(e @ (M @ e))))
        rates = [np.log2(errors[k] / errors[k + 1]) for k in range(2)]
        assert min(rates) >= 1.9

    def test_objective_code_paths_agree(self):
        model = models.recon_case1()
        mesh = fixtures.disk_case1()
        state = model.solve(mesh)
        direct = model.objective(mesh, state)
        expanded = model.objective_by_expansion(mesh, state)
        assert expanded == pytest.approx(direct, rel=1e-12)
        assert direct > 0.0

    def test_fd_slope_on_disk(self):
        model = models.recon_case1()
        mesh = fixtures.graded_disk()
        report = models.fd_check(model, mesh, smooth_direction(mesh))
        assert 0.8 <= report["slope"] <= 1.2

    def test_fd_zero_direction_is_exact(self):
        model = models.recon_case1()
        mesh = fixtures.graded_disk()
        report = models.fd_check(model, mesh, np.zeros_like(mesh.vertices))
        assert np.all(report["errors"] < 1e-14)
        assert report["slope"] == 1.0


class TestStokesDrag:
    def test_poiseuille_dissipation_within_2_percent(self):
        # Parabolic profile 1/4 - y^2 in a length-2 channel dissipates
        # mu * integral of (du/dy)^2 = 2 mu / 3.
        mesh = fixtures.open_channel()
        model = models.StokesDragModel(viscosity=1.0)
        state = model.solve(mesh)
        J = model.objective(mesh, state)
        assert J == pytest.approx(2.0 / 3.0, rel=0.02)

    def test_outflow_profile_matches_inflow(self):
        mesh = fixtures.open_channel()
        model = models.StokesDragModel(viscosity=1.0)
        state = model.solve(mesh)
        block = mesh.n_vertices + mesh.n_triangles
        outlet = np.isclose(mesh.vertices[:, 0], 2.0)
        y = mesh.vertices[outlet, 1]
        u_x = state["u"][:block][: mesh.n_vertices][outlet]
        assert np.abs(u_x - (0.25 - y**2)).max() < 0.02

    def test_boundary_work_identity(self):
        # With B u = 0 discretely, J = u^T A u equals the reaction work of
        # the prescribed Dirichlet values.
        mesh = fixtures.open_channel()
        model = models.StokesDragModel(viscosity=1.0)
        state = model.solve(mesh)
        A, B = fem.stokes_blocks(fem.mini_space(mesh), fem.p1_space(mesh), 1.0)
        reaction = A @ state["u"] + B.T @ state["p"]
        block = mesh.n_vertices + mesh.n_triangles
        inlet = model._marker_vertices(mesh, [fixtures.MARKER_INLET])
        idx = np.flatnonzero(inlet)
        coords = mesh.vertices[idx]
        profile = model.inflow(coords[:, 0], coords[:, 1])
        values = np.zeros(2 * block)
        values[idx] = profile[:, 0]
        values[idx + block] = profile[:, 1]
        work = float(values @ reaction)
        J = model.objective(mesh, state)
        assert work == pytest.approx(J, rel=1e-10)

    def test_zero_inflow_gives_rest(self):
        still = lambda x, y: np.stack([np.zeros_like(y), np.zeros_like(y)], axis=-1)
        model = models.StokesDragModel(inflow=still)
        mesh = fixtures.open_channel()
        state = model.solve(mesh)
        assert np.abs(state["u"]).max() <= 1e-12
        assert np.abs(state["p"]).max() <= 1e-12
        assert model.objective(mesh, state) <= 1e-12

    def test_obstacle_benchmark_solves(self):
        mesh = fixtures.channel_with_obstacle()
        model = models.drag_case1()
        state = model.solve(mesh)
        J = model.objective(mesh, state)
        assert np.isfinite(J) and J > 0.0

    def test_missing_markers_rejected(self):
        mesh = fixtures.graded_disk()
        model = models.drag_case1()
        with pytest.raises(fem.FemError):
            model.solve(mesh)

    def test_projected_descent_direction_has_zero_mean_flux(self):
        mesh = fixtures.channel_with_obstacle()
        model = models.drag_case1()
        state = model.solve(mesh)
        g = model.gradient(mesh, state)
        w = fem.unflatten_field(g.values, 2)
        projected = models.volume_project_field(
            mesh, w, free=model.free_vertex_mask(mesh)
        )
        C, boundary = fem.normal_trace_matrix(mesh)
        flux = float(np.ones(len(boundary)) @ (C @ fem.flatten_field(projected)))
        edges = mesh.vertices[mesh.boundary_edges]
        perimeter = np.linalg.norm(edges[:, 1] - edges[:, 0], axis=1).sum()
        assert abs(flux) <= 1e-10 * perimeter

    def test_gradient_silent_on_pinned_walls(self):
        mesh = fixtures.channel_with_obstacle()
        model = models.drag_case1()
        g = model.gradient(mesh, model.solve(mesh))
        w = fem.unflatten_field(g.values, 2)
        pinned = ~model.free_vertex_mask(mesh)
        assert np.abs(w[pinned]).max() == 0.0


class TestEigenvalue:
    def test_square_eigenvalue_near_analytic(self):
        model = models.EigenvalueModel(ell=1)
        mesh = fixtures.crisscross_square(16)
        state = model.solve(mesh)
        assert model.objective(mesh, state) == pytest.approx(
            2.0 * np.pi**2, rel=0.02
        )

    def test_values_ascending_and_rayleigh_consistent(self):
        mesh = fixtures.ellipse_disk(aspect=1.0, area=1.0)
        model = models.EigenvalueModel(ell=3)
        state = model.solve(mesh)
        values = state["values"]
        assert np.all(np.diff(values) >= -1e-12)
        K = fem.stiffness_matrix(fem.p1_space(mesh)).matrix
        M = fem.mass_matrix(fem.p1_space(mesh)).matrix
        for k in range(3):
            u = state["vectors"][:, k]
            rayleigh = float(u @ (K @ u)) / float(u @ (M @ u))
            assert rayleigh == pytest.approx(values[k], rel=1e-10)

    def test_unit_area_disk_ground_state(self):
        mesh = fixtures.ellipse_disk(aspect=1.0, area=1.0)
        model = models.EigenvalueModel(ell=1)
        lam = model.objective(mesh, model.solve(mesh))
        assert lam == pytest.approx(DISK_LAMBDA1, rel=0.01)

    def test_disk_ground_state_refines_toward_analytic(self):
        errors = []
        for rings in ((6, 13, 19, 26), (6, 13, 19, 26, 32, 39, 45, 52)):
            mesh = fixtures.ellipse_disk(aspect=1.0, area=1.0, ring_counts=rings)
            model = models.EigenvalueModel(ell=1)
            lam = model.objective(mesh, model.solve(mesh))
            errors.append(abs(lam - DISK_LAMBDA1) / DISK_LAMBDA1)
        assert errors[1] < errors[0]

    def test_disk_second_eigenvalue_is_near_double(self):
        mesh = fixtures.ellipse_disk(aspect=1.0, area=1.0)
        state = models.EigenvalueModel(ell=3).solve(mesh)
        values = state["values"]
        assert abs(values[1] - values[2]) / values[1] < 1e-2

    def test_near_double_eigenvalue_triggers_cluster_average(self):
        mesh = fixtures.ellipse_disk(aspect=1.0, area=1.0)
        model = models.EigenvalueModel(ell=2, gap_tol=1e-2)
        state = model.solve(mesh)
        cluster = model._cluster(state["values"])
        assert len(cluster) >= 2
        g = model.gradient(mesh, state)
        assert np.all(np.isfinite(g.values))

    def test_translation_invariance(self):
        mesh = fixtures.crisscross_square(12)
        model = models.EigenvalueModel(ell=1)
        g = model.gradient(mesh, model.solve(mesh))
        for shift in ((1.0, 0.0), (0.0, 1.0)):
            v = np.tile(shift, (mesh.n_vertices, 1))
            assert abs(g.pair(v)) <= 1e-8 * np.linalg.norm(g.values)

    def test_fd_slope_on_square(self):
        model = models.EigenvalueModel(ell=1)
        mesh = fixtures.crisscross_square(12)
        report = models.fd_check(model, mesh, smooth_direction(mesh))
        assert 0.8 <= report["slope"] <= 1.2

    def test_index_must_be_positive(self):
        with pytest.raises(ValueError):
            models.EigenvalueModel(ell=0)


class TestVolumeProjection:
    def test_dilation_scalar_speed_projects_to_zero(self):
        # On a circle the dilation normal speed is the constant radius, so
        # subtracting the arclength mean annihilates it exactly.
        points = fixtures.circle_polygon(64)
        segments = np.column_stack([np.arange(64), (np.arange(64) + 1) % 64])
        data = np.full(64, 0.37)
        projected = models.volume_project_scalar(points, segments, data)
        assert np.abs(projected).max() <= 1e-14

    def test_translation_scalar_speed_unchanged(self):
        points = fixtures.circle_polygon(64)
        segments = np.column_stack([np.arange(64), (np.arange(64) + 1) % 64])
        normals = points / np.linalg.norm(points, axis=1, keepdims=True)
        data = normals[:, 0]  # normal speed of the unit x-translation
        projected = models.volume_project_scalar(points, segments, data)
        assert np.allclose(projected, data, atol=1e-12)

    def test_translation_field_unchanged(self):
        mesh = fixtures.graded_disk()
        field = np.tile([1.0, 0.0], (mesh.n_vertices, 1))
        projected = models.volume_project_field(mesh, field)
        assert np.allclose(projected, field, atol=1e-12)

    def test_dilation_field_flux_removed(self):
        mesh = fixtures.graded_disk()
        projected = models.volume_project_field(mesh, mesh.vertices.copy())
        C, boundary = fem.normal_trace_matrix(mesh)
        flux = float(np.ones(len(boundary)) @ (C @ fem.flatten_field(projected)))
        assert abs(flux) <= 1e-12 * enclosed_measure(mesh)

    def test_target_flux_is_met_exactly(self):
        mesh = fixtures.graded_disk()
        target = 0.0123
        projected = models.volume_project_field(
            mesh, smooth_direction(mesh), target_flux=target
        )
        C, boundary = fem.normal_trace_matrix(mesh)
        flux = float(np.ones(len(boundary)) @ (C @ fem.flatten_field(projected)))
        assert flux == pytest.approx(target, abs=1e-13)

    def test_interior_values_untouched(self):
        mesh = fixtures.graded_disk()
        field = smooth_direction(mesh)
        projected = models.volume_project_field(mesh, field)
        interior = np.ones(mesh.n_vertices, dtype=bool)
        interior[mesh.boundary_vertex_indices()] = False
        assert np.array_equal(projected[interior], field[interior])
