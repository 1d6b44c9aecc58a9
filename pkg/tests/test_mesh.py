"""Mesh geometry, quality, flow-map, and file round-trip tests."""

import numpy as np
import pytest

from shapeflow import fixtures
from shapeflow.mesh import (
    InversionError,
    MeshError,
    SimplicialMesh2D,
    SurfaceMesh3D,
    apply_flow_map,
    enclosed_measure,
    facet_normals,
    quality_report,
    read_mesh,
    write_mesh,
)


def unit_square_two_triangles() -> SimplicialMesh2D:
    vertices = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    triangles = [(0, 1, 2), (0, 2, 3)]
    return SimplicialMesh2D.from_triangles(vertices, triangles)


def ngon_disk(n: int) -> SimplicialMesh2D:
    """Fan triangulation of the regular n-gon inscribed in the unit circle."""
    angles = 2.0 * np.pi * np.arange(n) / n
    rim = np.column_stack([np.cos(angles), np.sin(angles)])
    vertices = np.vstack([[0.0, 0.0], rim])
    triangles = [(0, 1 + k, 1 + (k + 1) % n) for k in range(n)]
    return SimplicialMesh2D.from_triangles(vertices, triangles)


def rigid_motion(mesh: SimplicialMesh2D, angle: float, shift) -> SimplicialMesh2D:
    c, s = np.cos(angle), np.sin(angle)
    rot = np.array([[c, -s], [s, c]])
    moved = mesh.vertices @ rot.T + np.asarray(shift)
    return SimplicialMesh2D(
        moved, mesh.triangles, mesh.boundary_edges, mesh.boundary_markers
    )


class TestConstruction:
    def test_inverted_triangle_rejected(self):
        with pytest.raises(MeshError):
            SimplicialMesh2D.from_triangles(
                [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], [(0, 2, 1)]
            )

    def test_boundary_edges_must_match_topology(self):
        square = unit_square_two_triangles()
        bad_edges = square.boundary_edges.copy()
        bad_edges[0] = bad_edges[0][::-1]
        with pytest.raises(MeshError):
            SimplicialMesh2D(square.vertices, square.triangles, bad_edges)

    def test_vertex_index_out_of_range(self):
        with pytest.raises(MeshError):
            SimplicialMesh2D.from_triangles(
                [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], [(0, 1, 3)]
            )

    def test_surface_inconsistent_orientation_rejected(self):
        # Both triangles traverse the shared edge (1, 2) in the same direction.
        vertices = [(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (1.0, 1.0, 0.0)]
        with pytest.raises(MeshError):
            SurfaceMesh3D(vertices, [(0, 1, 2), (1, 2, 3)])

    def test_meshes_are_immutable(self):
        square = unit_square_two_triangles()
        with pytest.raises(ValueError):
            square.vertices[0, 0] = 5.0


class TestFacetNormals:
    def test_unit_square_bottom_edge(self):
        square = unit_square_two_triangles()
        normals = facet_normals(square)
        edges = square.boundary_edges.tolist()
        bottom = edges.index([0, 1])
        assert np.allclose(normals[bottom], (0.0, -1.0), atol=1e-14)

    def test_ngon_outwardness(self):
        disk = ngon_disk(64)
        normals = facet_normals(disk)
        midpoints = 0.5 * (
            disk.vertices[disk.boundary_edges[:, 0]]
            + disk.vertices[disk.boundary_edges[:, 1]]
        )
        assert np.all(np.einsum("ij,ij->i", midpoints, normals) > 0.0)

    def test_icosphere_normals_near_radial(self):
        sphere = fixtures.icosphere(refinements=2)
        normals = facet_normals(sphere)
        centroids = sphere.vertices[sphere.triangles].mean(axis=1)
        radial = centroids / np.linalg.norm(centroids, axis=1, keepdims=True)
        cosines = np.clip(np.einsum("ij,ij->i", normals, radial), -1.0, 1.0)
        assert np.degrees(np.arccos(cosines)).max() < 5.0

    def test_unit_length(self):
        for mesh in (ngon_disk(17), fixtures.icosphere(refinements=1)):
            lengths = np.linalg.norm(facet_normals(mesh), axis=1)
            assert np.allclose(lengths, 1.0, rtol=0.0, atol=1e-12)


class TestApplyFlowMap:
    def test_zero_velocity_is_identity(self):
        disk = ngon_disk(12)
        moved = apply_flow_map(disk, np.zeros_like(disk.vertices), tau=0.7)
        assert np.array_equal(moved.vertices, disk.vertices)
        assert np.array_equal(moved.triangles, disk.triangles)

    def test_rigid_translation(self):
        square = unit_square_two_triangles()
        velocity = np.tile([1.0, 0.0], (square.n_vertices, 1))
        moved = apply_flow_map(square, velocity, tau=0.5)
        assert np.allclose(moved.vertices, square.vertices + [0.5, 0.0])

    def test_connectivity_preserved(self):
        disk = fixtures.graded_disk()
        rng = np.random.default_rng(3)
        velocity = 0.01 * rng.standard_normal(disk.vertices.shape)
        moved = apply_flow_map(disk, velocity, tau=0.1)
        assert np.array_equal(moved.triangles, disk.triangles)
        assert np.array_equal(moved.boundary_edges, disk.boundary_edges)

    def test_shrink_past_origin_raises_inversion(self):
        disk = ngon_disk(24)
        with pytest.raises(InversionError):
            apply_flow_map(disk, -disk.vertices, tau=2.0)

    def test_inversion_error_lists_elements(self):
        disk = ngon_disk(24)
        with pytest.raises(InversionError, match=r"\d"):
            apply_flow_map(disk, -disk.vertices, tau=2.0)


class TestEnclosedMeasure:
    def test_unit_square(self):
        assert enclosed_measure(unit_square_two_triangles()) == pytest.approx(1.0)

    @pytest.mark.parametrize("n", [8, 32, 128])
    def test_ngon_area(self, n):
        exact = 0.5 * n * np.sin(2.0 * np.pi / n)
        assert enclosed_measure(ngon_disk(n)) == pytest.approx(exact, rel=1e-12)

    def test_icosphere_volume(self):
        sphere = fixtures.icosphere(refinements=3)
        exact = 4.0 * np.pi / 3.0
        assert enclosed_measure(sphere) == pytest.approx(exact, rel=0.01)

    def test_open_surface_rejected(self):
        patch = fixtures.flat_disk_patch()
        with pytest.raises(MeshError):
            enclosed_measure(patch)

    def test_rigid_motion_invariance(self):
        disk = fixtures.graded_disk()
        moved = rigid_motion(disk, angle=0.83, shift=(2.5, -1.25))
        assert enclosed_measure(moved) == pytest.approx(
            enclosed_measure(disk), rel=1e-12
        )


class TestQualityReport:
    def test_equilateral_min_angle(self):
        tri = SimplicialMesh2D.from_triangles(
            [(0.0, 0.0), (1.0, 0.0), (0.5, 0.5 * np.sqrt(3.0))], [(0, 1, 2)]
        )
        report = quality_report(tri)
        assert report.min_angle == pytest.approx(60.0, abs=1e-10)
        assert report.max_aspect_ratio == pytest.approx(1.0, abs=1e-10)

    def test_right_isoceles_min_angle(self):
        tri = SimplicialMesh2D.from_triangles(
            [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], [(0, 1, 2)]
        )
        assert quality_report(tri).min_angle == pytest.approx(45.0, abs=1e-10)

    def test_structured_square_edge_ratio(self):
        square = fixtures.structured_square(8)
        report = quality_report(square)
        assert report.edge_length_ratio == pytest.approx(np.sqrt(2.0), rel=1e-12)

    def test_metric_ranges(self):
        for mesh in (fixtures.graded_disk(), fixtures.lshape(6)):
            report = quality_report(mesh)
            assert 0.0 < report.min_angle <= 60.0
            assert report.max_aspect_ratio >= 1.0
            assert 0.0 < report.min_area_ratio <= 1.0
            assert report.edge_length_ratio >= 1.0

    def test_min_angle_rigid_and_scale_invariant(self):
        disk = fixtures.graded_disk()
        base = quality_report(disk).min_angle
        moved = rigid_motion(disk, angle=1.1, shift=(0.3, 0.9))
        scaled = SimplicialMesh2D(
            3.7 * disk.vertices, disk.triangles, disk.boundary_edges
        )
        assert quality_report(moved).min_angle == pytest.approx(base, rel=1e-10)
        assert quality_report(scaled).min_angle == pytest.approx(base, rel=1e-10)


class TestFileRoundTrip:
    def test_off_round_trip_2d(self, tmp_path):
        disk = fixtures.graded_disk()
        path = str(tmp_path / "disk.off")
        write_mesh(disk, path)
        back = read_mesh(path)
        assert np.array_equal(back.triangles, disk.triangles)
        assert np.allclose(back.vertices, disk.vertices, rtol=1e-12, atol=0.0)

    def test_off_round_trip_surface(self, tmp_path):
        sphere = fixtures.icosphere(refinements=1)
        path = str(tmp_path / "sphere.off")
        write_mesh(sphere, path)
        back = read_mesh(path)
        assert isinstance(back, SurfaceMesh3D)
        assert np.array_equal(back.triangles, sphere.triangles)
        assert np.allclose(back.vertices, sphere.vertices, rtol=1e-12, atol=0.0)

    def test_off_out_of_range_index_names_line(self, tmp_path):
        path = tmp_path / "bad.off"
        path.write_text(
            "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 3\n"
        )
        with pytest.raises(MeshError, match="line 6"):
            read_mesh(str(path))

    def test_off_malformed_header(self, tmp_path):
        path = tmp_path / "noheader.off"
        path.write_text("FOF\n3 1 0\n")
        with pytest.raises(MeshError, match="line 1"):
            read_mesh(str(path))

    def test_csv_pair_round_trip(self, tmp_path):
        channel = fixtures.channel_with_obstacle()
        path = str(tmp_path / "channel.node.csv")
        write_mesh(channel, path)
        back = read_mesh(path)
        assert np.array_equal(back.triangles, channel.triangles)
        assert np.allclose(back.vertices, channel.vertices, rtol=1e-12, atol=0.0)
        assert back.boundary_markers is not None
        assert np.array_equal(back.boundary_markers, channel.boundary_markers)

    def test_benchmark_disk_loads_with_2842_triangles(self):
        disk = fixtures.disk_case1()
        assert disk.n_triangles == 2842
        assert enclosed_measure(disk) == pytest.approx(np.pi, rel=0.01)
