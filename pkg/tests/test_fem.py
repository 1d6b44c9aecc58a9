"""Element assembly, projection, and curvature tests."""

import numpy as np
import pytest
import scipy.linalg

from shapeflow import fem, fixtures
from shapeflow.linalg import SparseSystem, solve_spd
from shapeflow.mesh import SimplicialMesh2D, SurfaceMesh3D, enclosed_measure


def reference_triangle() -> SimplicialMesh2D:
    return SimplicialMesh2D.from_triangles(
        [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], [(0, 1, 2)]
    )


def ngon_disk(n: int) -> SimplicialMesh2D:
    angles = 2.0 * np.pi * np.arange(n) / n
    rim = np.column_stack([np.cos(angles), np.sin(angles)])
    vertices = np.vstack([[0.0, 0.0], rim])
    triangles = [(0, 1 + k, 1 + (k + 1) % n) for k in range(n)]
    return SimplicialMesh2D.from_triangles(vertices, triangles)


class TestMassMatrix:
    def test_reference_triangle_block(self):
        mass = fem.mass_matrix(fem.p1_space(reference_triangle()))
        exact = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 24.0
        assert np.allclose(mass.matrix.toarray(), exact, atol=1e-14)

    def test_entries_sum_to_area(self):
        mesh = fixtures.graded_disk()
        mass = fem.mass_matrix(fem.p1_space(mesh))
        total = float(np.ones(mesh.n_vertices) @ (mass.matrix @ np.ones(mesh.n_vertices)))
        assert total == pytest.approx(enclosed_measure(mesh), rel=1e-12)

    def test_boundary_segment_block(self):
        h = 0.7
        points = np.array([[0.0, 0.0], [h, 0.0]])
        segments = np.array([[0, 1]])
        block = fem.curve_mass(points, segments, 2).toarray()
        exact = (h / 6.0) * np.array([[2.0, 1.0], [1.0, 2.0]])
        assert np.allclose(block, exact, atol=1e-14)

    def test_symmetry(self):
        mesh = fixtures.lshape(5)
        matrix = fem.mass_matrix(fem.p1_vector_space(mesh)).matrix
        assert abs(matrix - matrix.T).max() <= 1e-12 * abs(matrix).max()


class TestStiffnessMatrix:
    def test_reference_triangle_block(self):
        stiff = fem.stiffness_matrix(fem.p1_space(reference_triangle()))
        exact = 0.5 * np.array(
            [[2.0, -1.0, -1.0], [-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]]
        )
        assert np.allclose(stiff.matrix.toarray(), exact, atol=1e-14)

    def test_constants_in_kernel(self):
        mesh = fixtures.graded_disk()
        stiff = fem.stiffness_matrix(fem.p1_space(mesh))
        residual = stiff.matrix @ np.ones(mesh.n_vertices)
        assert np.abs(residual).max() <= 1e-12

    def test_flat_surface_matches_planar_block(self):
        planar = fem.stiffness_matrix(fem.p1_space(reference_triangle()))
        # Same triangle rigidly rotated into a tilted plane in R^3.
        corners2d = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        axis = np.array([1.0, 2.0, 0.5])
        axis /= np.linalg.norm(axis)
        theta = 0.9
        K_rot = np.array(
            [
                [0.0, -axis[2], axis[1]],
                [axis[2], 0.0, -axis[0]],
                [-axis[1], axis[0], 0.0],
            ]
        )
        rot = scipy.linalg.expm(theta * K_rot)
        corners3d = np.column_stack([corners2d, np.zeros(3)]) @ rot.T
        surface = SurfaceMesh3D(corners3d, [(0, 1, 2)])
        lifted = fem.stiffness_matrix(fem.surface_scalar_space(surface))
        assert np.allclose(
            lifted.matrix.toarray(), planar.matrix.toarray(), atol=1e-12
        )

    def test_curve_segment_block(self):
        h = 0.4
        points = np.array([[0.0, 0.0], [h, 0.0]])
        segments = np.array([[0, 1]])
        block = fem.curve_stiffness(points, segments, 2).toarray()
        exact = (1.0 / h) * np.array([[1.0, -1.0], [-1.0, 1.0]])
        assert np.allclose(block, exact, atol=1e-14)


class TestStrainForm:
    def test_translation_in_kernel(self):
        mesh = ngon_disk(24)
        strain = fem.strain_form(fem.p1_vector_space(mesh))
        w = fem.flatten_field(np.tile([0.3, -1.7], (mesh.n_vertices, 1)))
        assert abs(w @ (strain.matrix @ w)) <= 1e-12

    def test_rotation_in_kernel(self):
        mesh = ngon_disk(24)
        strain = fem.strain_form(fem.p1_vector_space(mesh))
        rot = np.column_stack([-mesh.vertices[:, 1], mesh.vertices[:, 0]])
        w = fem.flatten_field(rot)
        assert abs(w @ (strain.matrix @ w)) <= 1e-12

    def test_dilation_energy_equals_twice_area(self):
        # w = (x, y) has strain tensor I, so the energy integrand is 2.
        mesh = ngon_disk(64)
        strain = fem.strain_form(fem.p1_vector_space(mesh))
        w = fem.flatten_field(mesh.vertices.copy())
        energy = 0.5 * float(w @ (strain.matrix @ w))
        assert energy == pytest.approx(enclosed_measure(mesh), rel=1e-12)
        assert energy == pytest.approx(np.pi, rel=0.01)

    def test_kernel_dimension_is_three(self):
        mesh = fixtures.structured_square(4)
        strain = fem.strain_form(fem.p1_vector_space(mesh))
        values = np.linalg.eigvalsh(strain.matrix.toarray())
        assert int(np.sum(values < 1e-10)) == 3


class TestDirichletPoisson:
    def solve_manufactured(self, n: int) -> float:
        """L2 error of the P1 solution of -laplace(u) + u = f, u = 0 on the edge."""
        mesh = fixtures.structured_square(n)
        space = fem.p1_space(mesh)
        x, y = mesh.vertices[:, 0], mesh.vertices[:, 1]
        exact = np.sin(np.pi * x) * np.sin(np.pi * y)
        f = (2.0 * np.pi**2 + 1.0) * exact
        M = fem.mass_matrix(space)
        K = fem.stiffness_matrix(space)
        system = SparseSystem((K.matrix + M.matrix).tocsr(), spd=True)
        rhs = M.matrix @ f
        mask = np.zeros(mesh.n_vertices, dtype=bool)
        mask[mesh.boundary_vertex_indices()] = True
        reduced, rhs = fem.apply_dirichlet(system, rhs, mask, np.zeros_like(f))
        u = solve_spd(reduced, rhs)
        e = u - exact
        return float(np.sqrt(e @ (M.matrix @ e)))

    def test_second_order_l2_convergence(self):
        errors = [self.solve_manufactured(n) for n in (8, 16, 32)]
        rates = [np.log2(errors[k] / errors[k + 1]) for k in range(2)]
        assert min(rates) >= 1.9


class TestStokesBlocks:
    def infsup_constant(self, n: int) -> float:
        """Smallest nonzero generalized singular value of the divergence block."""
        mesh = fixtures.structured_square(n)
        A, B = fem.stokes_blocks(fem.mini_space(mesh), fem.p1_space(mesh), 1.0)
        block = mesh.n_vertices + mesh.n_triangles
        mask = np.zeros(2 * block, dtype=bool)
        boundary = mesh.boundary_vertex_indices()
        mask[boundary] = True
        mask[boundary + block] = True
        free = ~mask
        A_f = A[free][:, free].toarray()
        B_f = B[:, free].toarray()
        M_p = fem.mass_matrix(fem.p1_space(mesh)).matrix.toarray()
        schur = B_f @ np.linalg.solve(A_f, B_f.T)
        values = scipy.linalg.eigh(schur, M_p, eigvals_only=True)
        # The enclosed-flow pressure nullspace (constants) owns values[0].
        assert values[0] <= 1e-10
        return float(np.sqrt(values[1]))

    def test_infsup_bounded_across_refinements(self):
        betas = [self.infsup_constant(n) for n in (4, 8, 12)]
        assert min(betas) >= 0.1
        assert max(betas) / min(betas) <= 1.5

    def test_gradient_block_kernel_is_translations(self):
        mesh = fixtures.structured_square(4)
        A, _ = fem.stokes_blocks(fem.mini_space(mesh), fem.p1_space(mesh), 2.0)
        block = mesh.n_vertices + mesh.n_triangles
        w = np.zeros(2 * block)
        w[: mesh.n_vertices] = 1.0
        assert np.abs(A @ w).max() <= 1e-12

    def test_divergence_row_sums_vanish(self):
        # Each pressure row integrates -q div(u); constant u is divergence free.
        mesh = fixtures.structured_square(4)
        _, B = fem.stokes_blocks(fem.mini_space(mesh), fem.p1_space(mesh), 1.0)
        block = mesh.n_vertices + mesh.n_triangles
        for comp in range(2):
            w = np.zeros(2 * block)
            w[comp * block : comp * block + mesh.n_vertices] = 1.0
            assert np.abs(B @ w).max() <= 1e-12

    def test_requires_mini_pressure_pair(self):
        mesh = fixtures.structured_square(3)
        with pytest.raises(fem.FemError):
            fem.stokes_blocks(fem.p1_vector_space(mesh), fem.p1_space(mesh), 1.0)


class TestNormalTrace:
    def test_translation_flux_sums_to_zero(self):
        mesh = ngon_disk(32)
        C, boundary = fem.normal_trace_matrix(mesh)
        w = fem.flatten_field(np.tile([1.0, 0.0], (mesh.n_vertices, 1)))
        fluxes = C @ w
        assert len(boundary) == 32
        assert abs(fluxes.sum()) <= 1e-12

    def test_dilation_flux_sums_to_twice_area(self):
        # div(x, y) = 2, so the total weak normal flux is 2 |Omega|.
        mesh = ngon_disk(32)
        C, _ = fem.normal_trace_matrix(mesh)
        w = fem.flatten_field(mesh.vertices.copy())
        assert (C @ w).sum() == pytest.approx(
            2.0 * enclosed_measure(mesh), rel=1e-12
        )


class TestProjectNormals:
    def test_flat_patch_exact(self):
        patch, _ = fixtures.flat_disk_patch()
        normals = fem.project_normals(patch)
        assert np.allclose(normals[:, :2], 0.0, atol=1e-10)
        assert np.allclose(normals[:, 2], normals[0, 2], atol=1e-10)
        assert np.allclose(np.abs(normals[:, 2]), 1.0, atol=1e-12)

    def test_icosphere_radial_within_2_degrees(self):
        sphere = fixtures.icosphere(refinements=2)
        normals = fem.project_normals(sphere)
        radial = sphere.vertices / np.linalg.norm(
            sphere.vertices, axis=1, keepdims=True
        )
        cosines = np.clip(np.einsum("ij,ij->i", normals, radial), -1.0, 1.0)
        assert np.degrees(np.arccos(cosines)).max() < 2.0

    def test_cylinder_normals_orthogonal_to_axis(self):
        patch = fixtures.cylinder_patch()
        normals = fem.project_normals(patch)
        axis = np.array([0.0, 0.0, 1.0])
        angles = np.degrees(np.abs(np.arcsin(np.clip(normals @ axis, -1.0, 1.0))))
        assert angles.max() < 2.0


class TestDiscreteMeanCurvature:
    @staticmethod
    def curvature(mesh: SurfaceMesh3D) -> np.ndarray:
        return fem.discrete_mean_curvature(mesh, fem.project_normals(mesh))

    def test_flat_patch_is_zero(self):
        mesh, _ = fixtures.flat_disk_patch()
        H = self.curvature(mesh)
        interior = np.setdiff1d(np.arange(mesh.n_vertices), mesh.boundary_vertices)
        assert np.abs(H[interior]).max() < 1e-8

    def test_unit_sphere_refines_to_two(self):
        # L2-norm convergence; pointwise values at the 12 irregular
        # icosahedron vertices stay O(1) off, as is typical for weak
        # curvature recovery, so the max norm is not the right metric.
        errors = []
        for refinements in (2, 3, 4):
            sphere = fixtures.icosphere(refinements=refinements)
            e = self.curvature(sphere) - 2.0
            M = fem.mass_matrix(fem.surface_scalar_space(sphere)).matrix
            area = float(np.ones(len(e)) @ (M @ np.ones(len(e))))
            errors.append(float(np.sqrt(e @ (M @ e) / area)))
        assert errors[2] < errors[1] < errors[0]
        assert errors[2] < 0.025

    def test_scaling_with_radius(self):
        # Uniform scaling by R multiplies the recovered field by exactly 1/R.
        R = 2.5
        H_unit = self.curvature(fixtures.icosphere(refinements=2))
        H_scaled = self.curvature(fixtures.icosphere(refinements=2, radius=R))
        assert np.allclose(R * H_scaled, H_unit, atol=1e-12)
        assert np.median(H_scaled) == pytest.approx(2.0 / R, rel=0.05)
