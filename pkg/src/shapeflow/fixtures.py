"""Programmatic benchmark geometries.

Planar generators (structured square, polar disk, L-shape, channel with a
rectangular obstacle) and surface generators (icosphere, polar patches for
disks, spherical caps, cones, and saddles).  Patch generators that carry a
target boundary conormal return ``(mesh, mu_out)`` where ``mu_out`` is an
(nv, 3) array whose rows are meaningful only at boundary vertices: the unit
direction, tangent to the intended continuation surface and perpendicular
to the boundary curve, pointing into the patch.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull

from shapeflow.mesh import SimplicialMesh2D, SurfaceMesh3D, enclosed_measure

# Boundary-edge marker values used by the channel fixture.
MARKER_INLET = 1
MARKER_WALL = 2
MARKER_OUTLET = 3
MARKER_OBSTACLE = 4


def structured_rectangle(
    nx: int, ny: int, lo=(0.0, 0.0), hi=(1.0, 1.0)
) -> SimplicialMesh2D:
    """Uniform grid of nx-by-ny cells, each split into two triangles."""
    xs = np.linspace(lo[0], hi[0], nx + 1)
    ys = np.linspace(lo[1], hi[1], ny + 1)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    vertices = np.stack([gx.ravel(), gy.ravel()], axis=1)

    def vid(i, j):
        return i * (ny + 1) + j

    triangles = []
    for i in range(nx):
        for j in range(ny):
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i + 1, j + 1), vid(i, j + 1)
            triangles.append((a, b, c))
            triangles.append((a, c, d))
    return SimplicialMesh2D.from_triangles(vertices, np.asarray(triangles))


def crisscross_square(n: int, lo=(0.0, 0.0), size: float = 1.0) -> SimplicialMesh2D:
    """Unit-style square grid with cell diagonals alternating by parity.

    Every corner cell has its diagonal incident to the corner vertex, so
    boundary-driven flows can round the corners off without flattening a
    triangle that has two boundary edges.
    """
    xs = lo[0] + size * np.arange(n + 1) / n
    ys = lo[1] + size * np.arange(n + 1) / n
    verts = np.array([[x, y] for x in xs for y in ys])

    def idx(i: int, j: int) -> int:
        return i * (n + 1) + j

    triangles = []
    for i in range(n):
        for j in range(n):
            a, b = idx(i, j), idx(i + 1, j)
            c, d = idx(i + 1, j + 1), idx(i, j + 1)
            if (i + j) % 2 == 0:
                triangles += [(a, b, c), (a, c, d)]
            else:
                triangles += [(a, b, d), (b, c, d)]
    return SimplicialMesh2D.from_triangles(verts, np.asarray(triangles, dtype=np.int64))


def structured_square(n: int, lo=(0.0, 0.0), size: float = 1.0) -> SimplicialMesh2D:
    """Unit-style square with 2*n*n triangles."""
    return structured_rectangle(n, n, lo, (lo[0] + size, lo[1] + size))


def open_channel(
    nx: int = 40, ny: int = 20, lo=(0.0, -0.5), hi=(2.0, 0.5)
) -> SimplicialMesh2D:
    """Obstacle-free flow channel with inlet, wall, and outlet markers."""
    base = structured_rectangle(nx, ny, lo, hi)
    mids = 0.5 * (
        base.vertices[base.boundary_edges[:, 0]]
        + base.vertices[base.boundary_edges[:, 1]]
    )
    markers = np.full(len(mids), MARKER_WALL, dtype=np.int64)
    markers[np.isclose(mids[:, 0], lo[0])] = MARKER_INLET
    markers[np.isclose(mids[:, 0], hi[0])] = MARKER_OUTLET
    return SimplicialMesh2D(
        vertices=base.vertices,
        triangles=base.triangles,
        boundary_edges=base.boundary_edges,
        boundary_markers=markers,
    )


def _fan_and_rings(n_seg: int, ring_points: list[np.ndarray], apex: np.ndarray):
    """Triangulate an apex plus concentric rings of n_seg points each.

    Rings are ordered from innermost to outermost; triangles are oriented
    counterclockwise as seen looking down the ring-winding axis.
    """
    vertices = [apex.reshape(1, -1)] + [r for r in ring_points]
    vertices = np.concatenate(vertices, axis=0)
    triangles = []
    first = 1  # vertex index where ring 0 starts
    for i in range(n_seg):
        j = (i + 1) % n_seg
        triangles.append((0, first + i, first + j))
    for ring in range(len(ring_points) - 1):
        inner = 1 + ring * n_seg
        outer = inner + n_seg
        for i in range(n_seg):
            j = (i + 1) % n_seg
            a, b = inner + i, inner + j
            c, d = outer + i, outer + j
            triangles.append((a, c, d))
            triangles.append((a, d, b))
    return vertices, np.asarray(triangles, dtype=np.int64)


def polar_disk(
    n_seg: int = 98,
    n_ring: int = 15,
    radius: float = 1.0,
    center=(0.0, 0.0),
) -> SimplicialMesh2D:
    """Disk meshed by a center fan plus quad rings; n_seg*(2*n_ring-1) triangles."""
    angles = 2.0 * np.pi * np.arange(n_seg) / n_seg
    unit = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    rings = [
        np.asarray(center) + (radius * k / n_ring) * unit for k in range(1, n_ring + 1)
    ]
    vertices, triangles = _fan_and_rings(n_seg, rings, np.asarray(center, dtype=float))
    return SimplicialMesh2D.from_triangles(vertices, triangles)


# Ring sizes for the 2842-triangle reconstruction disk: counts grow like
# 2*pi*j so elements stay near-equilateral, tuned so that with one center
# vertex 2*V_interior + V_boundary - 2 = 2842 exactly.
_DISK_RING_COUNTS = (
    6, 13, 19, 26, 32, 39, 45, 52, 58, 64, 71,
    77, 84, 90, 97, 103, 110, 116, 123, 130, 132,
)


def graded_disk(
    ring_counts=_DISK_RING_COUNTS,
    radius: float = 1.0,
    center=(0.0, 0.0),
    smooth: int = 2,
) -> SimplicialMesh2D:
    """Disk meshed by concentric rings of growing vertex count.

    Adjacent rings are joined by an angular sweep that always advances the
    ring whose next vertex comes first, so rings of unequal size mesh into
    m_inner + m_outer triangles.  A couple of Laplacian sweeps on interior
    vertices round off the ring structure; boundary vertices stay on the
    circle.
    """
    counts = list(ring_counts)
    n = len(counts)
    radii = [radius * (j + 1) / n for j in range(n)]
    verts = [np.zeros(2)]
    ring_start = []
    for j, (r, m) in enumerate(zip(radii, counts)):
        offset = 0.5 * (j % 2) * 2.0 * np.pi / m
        ang = offset + 2.0 * np.pi * np.arange(m) / m
        ring_start.append(len(verts))
        for a in ang:
            verts.append(np.array([r * np.cos(a), r * np.sin(a)]))
    verts = np.asarray(verts) + np.asarray(center, dtype=float)
    triangles = []
    s0, m0 = ring_start[0], counts[0]
    for i in range(m0):
        triangles.append((0, s0 + i, s0 + (i + 1) % m0))
    for j in range(1, n):
        triangles.extend(
            _merge_rings(verts, ring_start[j - 1], counts[j - 1], ring_start[j], counts[j])
        )
    triangles = np.asarray(triangles, dtype=np.int64)
    p = verts[triangles]
    cross = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (
        p[:, 1, 1] - p[:, 0, 1]
    ) * (p[:, 2, 0] - p[:, 0, 0])
    triangles[cross < 0] = triangles[cross < 0][:, [0, 2, 1]]
    adjacency = [set() for _ in range(len(verts))]
    for a, b, c in triangles:
        adjacency[a].update((b, c))
        adjacency[b].update((a, c))
        adjacency[c].update((a, b))
    neighbors = [np.array(sorted(s)) for s in adjacency]
    n_interior = len(verts) - counts[-1]  # boundary ring is appended last
    for _ in range(smooth):
        smoothed = verts.copy()
        for i in range(n_interior):
            smoothed[i] = verts[neighbors[i]].mean(axis=0)
        verts = smoothed
    return SimplicialMesh2D.from_triangles(verts, triangles)


def _merge_rings(verts, start_a, m_a, start_b, m_b):
    """Triangulate the annulus between two rings by merging on angle."""
    theta_a = np.arctan2(verts[start_a : start_a + m_a, 1], verts[start_a : start_a + m_a, 0])
    theta_b = np.arctan2(verts[start_b : start_b + m_b, 1], verts[start_b : start_b + m_b, 0])
    theta_a, theta_b = theta_a % (2.0 * np.pi), theta_b % (2.0 * np.pi)
    i_a, i_b = int(np.argmin(theta_a)), int(np.argmin(theta_b))

    def gap(theta, i0, steps, m):
        if steps + 1 >= m + 1:
            return np.inf
        if steps + 1 == m:
            return 2.0 * np.pi
        return (theta[(i0 + steps + 1) % m] - theta[i0]) % (2.0 * np.pi)

    triangles = []
    c_a = c_b = 0
    while c_a < m_a or c_b < m_b:
        next_a = gap(theta_a, i_a, c_a, m_a) if c_a < m_a else np.inf
        next_b = gap(theta_b, i_b, c_b, m_b) if c_b < m_b else np.inf
        va = start_a + (i_a + c_a) % m_a
        vb = start_b + (i_b + c_b) % m_b
        if next_a <= next_b:
            triangles.append((va, vb, start_a + (i_a + c_a + 1) % m_a))
            c_a += 1
        else:
            triangles.append((va, vb, start_b + (i_b + c_b + 1) % m_b))
            c_b += 1
    return triangles


def disk_case1() -> SimplicialMesh2D:
    """The shipped 2842-triangle unit disk used by the reconstruction runs."""
    from importlib import resources

    from shapeflow.mesh import read_mesh

    path = resources.files("shapeflow").joinpath("data/disk_case1.off")
    with resources.as_file(path) as p:
        return read_mesh(str(p))


def ellipse_disk(
    aspect: float = 1.3,
    area: float = 1.0,
    ring_counts=(6, 13, 19, 26, 32, 39, 45, 52),
) -> SimplicialMesh2D:
    """Elliptical disk of prescribed area, made by scaling a graded disk.

    The default is the starting shape for eigenvalue minimization: a mild
    ellipse whose area matches the target ball, so the constrained flow
    only has to round it off.
    """
    if aspect <= 0 or area <= 0:
        raise ValueError("aspect and area must be positive")
    disk = graded_disk(ring_counts=ring_counts)
    scaled = disk.vertices * np.array([np.sqrt(aspect), 1.0 / np.sqrt(aspect)])
    ellipse = SimplicialMesh2D(
        vertices=scaled,
        triangles=disk.triangles,
        boundary_edges=disk.boundary_edges,
        boundary_markers=disk.boundary_markers,
    )
    # Normalize the polygonal area itself, not the smooth ellipse area, so
    # volume-conserving flows hold the mesh at exactly the requested value.
    factor = np.sqrt(area / enclosed_measure(ellipse))
    return SimplicialMesh2D(
        vertices=scaled * factor,
        triangles=disk.triangles,
        boundary_edges=disk.boundary_edges,
        boundary_markers=disk.boundary_markers,
    )


def lshape(k: int = 16) -> SimplicialMesh2D:
    """L-shaped region [-1,1]^2 minus the open quadrant (0,1)x(0,1).

    Structured grid of cell width 1/k; 6*k*k triangles (1536 at k=16).
    """
    n = 2 * k
    xs = np.linspace(-1.0, 1.0, n + 1)
    ys = np.linspace(-1.0, 1.0, n + 1)
    index = -np.ones((n + 1, n + 1), dtype=np.int64)
    coords = []
    for i in range(n + 1):
        for j in range(n + 1):
            if xs[i] > 0.0 and ys[j] > 0.0:
                continue
            index[i, j] = len(coords)
            coords.append((xs[i], ys[j]))
    triangles = []
    for i in range(n):
        for j in range(n):
            if xs[i] >= 0.0 and ys[j] >= 0.0:
                continue
            a, b = index[i, j], index[i + 1, j]
            c, d = index[i + 1, j + 1], index[i, j + 1]
            if min(a, b, c, d) < 0:
                continue
            triangles.append((a, b, c))
            triangles.append((a, c, d))
    return SimplicialMesh2D.from_triangles(np.asarray(coords), np.asarray(triangles))


def channel_with_obstacle(h: float = 0.05) -> SimplicialMesh2D:
    """Channel [-0.5,1.5]x[-0.5,0.5] minus the obstacle [-0.2,0.2]x[-0.15,0.15].

    The grid conforms to the obstacle edges (h must divide 0.05 ranges);
    boundary edges carry markers: 1 inlet (x=-0.5), 2 wall (y=+-0.5),
    3 outlet (x=1.5), 4 obstacle.
    """
    nx = round(2.0 / h)
    ny = round(1.0 / h)
    xs = np.linspace(-0.5, 1.5, nx + 1)
    ys = np.linspace(-0.5, 0.5, ny + 1)
    for value in (-0.2, 0.2):
        if not np.isclose(xs - value, 0.0, atol=1e-12).any():
            raise ValueError(f"grid spacing {h} does not hit obstacle x = {value}")
    for value in (-0.15, 0.15):
        if not np.isclose(ys - value, 0.0, atol=1e-12).any():
            raise ValueError(f"grid spacing {h} does not hit obstacle y = {value}")

    def inside_obstacle(x, y):
        return -0.2 + 1e-12 < x < 0.2 - 1e-12 and -0.15 + 1e-12 < y < 0.15 - 1e-12

    index = -np.ones((nx + 1, ny + 1), dtype=np.int64)
    coords = []
    for i in range(nx + 1):
        for j in range(ny + 1):
            if inside_obstacle(xs[i], ys[j]):
                continue
            index[i, j] = len(coords)
            coords.append((xs[i], ys[j]))
    triangles = []
    for i in range(nx):
        for j in range(ny):
            cx, cy = (xs[i] + xs[i + 1]) / 2.0, (ys[j] + ys[j + 1]) / 2.0
            if -0.2 < cx < 0.2 and -0.15 < cy < 0.15:
                continue
            a, b = index[i, j], index[i + 1, j]
            c, d = index[i + 1, j + 1], index[i, j + 1]
            triangles.append((a, b, c))
            triangles.append((a, c, d))
    mesh = SimplicialMesh2D.from_triangles(np.asarray(coords), np.asarray(triangles))
    mids = 0.5 * (
        mesh.vertices[mesh.boundary_edges[:, 0]]
        + mesh.vertices[mesh.boundary_edges[:, 1]]
    )
    markers = np.full(len(mids), MARKER_OBSTACLE, dtype=np.int64)
    markers[np.isclose(mids[:, 0], -0.5)] = MARKER_INLET
    markers[np.isclose(mids[:, 0], 1.5)] = MARKER_OUTLET
    markers[np.isclose(np.abs(mids[:, 1]), 0.5)] = MARKER_WALL
    return SimplicialMesh2D(
        mesh.vertices, mesh.triangles, mesh.boundary_edges, markers
    )


def circle_polygon(
    n: int, radius: float = 1.0, center=(0.0, 0.0), nonuniform: float = 0.0
) -> np.ndarray:
    """Ordered (counterclockwise) polygon points on a circle.

    ``nonuniform`` in [0, 1) warps the angular spacing smoothly; 0 gives the
    regular n-gon.
    """
    t = np.arange(n) / n
    angles = 2.0 * np.pi * t + nonuniform * np.sin(2.0 * np.pi * t)
    return np.asarray(center) + radius * np.stack(
        [np.cos(angles), np.sin(angles)], axis=1
    )


def ellipse_polygon(n: int, a: float, b: float) -> np.ndarray:
    """Ordered polygon points on the ellipse (x/a)^2 + (y/b)^2 = 1."""
    angles = 2.0 * np.pi * np.arange(n) / n
    return np.stack([a * np.cos(angles), b * np.sin(angles)], axis=1)


# ---------------------------------------------------------------------------
# Surfaces
# ---------------------------------------------------------------------------


def icosphere(refinements: int = 3, radius: float = 1.0) -> SurfaceMesh3D:
    """Sphere from recursive midpoint subdivision of an icosahedron."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    base = []
    for s1 in (-1.0, 1.0):
        for s2 in (-phi, phi):
            base.extend([(s1, s2, 0.0), (0.0, s1, s2), (s2, 0.0, s1)])
    points = np.asarray(sorted(set(base)))
    points /= np.linalg.norm(points[0])
    hull = ConvexHull(points)
    triangles = []
    for simplex in hull.simplices:
        p0, p1, p2 = points[simplex]
        if np.dot(np.cross(p1 - p0, p2 - p0), p0 + p1 + p2) < 0:
            simplex = simplex[[0, 2, 1]]
        triangles.append(tuple(int(v) for v in simplex))
    vertices = [tuple(p) for p in points]

    for _ in range(refinements):
        midpoint: dict[tuple[int, int], int] = {}

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in midpoint:
                p = np.asarray(vertices[i]) + np.asarray(vertices[j])
                p /= np.linalg.norm(p)
                midpoint[key] = len(vertices)
                vertices.append(tuple(p))
            return midpoint[key]

        refined = []
        for a, b, c in triangles:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            refined.extend([(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)])
        triangles = refined
    pts = np.asarray(vertices)
    pts = radius * pts / np.linalg.norm(pts, axis=1)[:, None]
    return SurfaceMesh3D(pts, np.asarray(triangles, dtype=np.int64))


def _polar_patch(
    n_seg: int,
    n_ring: int,
    height_of_radius,
    ring_radii: np.ndarray,
) -> SurfaceMesh3D:
    """Graded fan-plus-rings patch over the plane, lifted to z = height(x, y).

    Ring vertex counts grow in proportion to the ring radius (the outermost
    ring keeps ``n_seg`` vertices), so elements stay near-equilateral all
    the way to the center instead of collapsing into a skinny apex fan.
    """
    rho_max = float(ring_radii[-1])
    counts = [max(5, int(round(n_seg * float(rho) / rho_max))) for rho in ring_radii]
    counts[-1] = n_seg
    apex_z = height_of_radius(np.zeros(1), np.zeros(1))[0]
    verts = [np.array([0.0, 0.0, apex_z])]
    ring_start = []
    for j, (rho, m) in enumerate(zip(ring_radii, counts)):
        offset = 0.5 * (j % 2) * 2.0 * np.pi / m
        ang = offset + 2.0 * np.pi * np.arange(m) / m
        x, y = rho * np.cos(ang), rho * np.sin(ang)
        z = height_of_radius(x, y)
        ring_start.append(len(verts))
        for k in range(m):
            verts.append(np.array([x[k], y[k], z[k]]))
    verts = np.asarray(verts)
    triangles = []
    s0, m0 = ring_start[0], counts[0]
    for i in range(m0):
        triangles.append((0, s0 + i, s0 + (i + 1) % m0))
    for j in range(1, n_ring):
        triangles.extend(
            _merge_rings(verts, ring_start[j - 1], counts[j - 1], ring_start[j], counts[j])
        )
    triangles = np.asarray(triangles, dtype=np.int64)
    # orient consistently via the injective projection onto the plane
    p = verts[triangles]
    cross = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (
        p[:, 1, 1] - p[:, 0, 1]
    ) * (p[:, 2, 0] - p[:, 0, 0])
    triangles[cross < 0] = triangles[cross < 0][:, [0, 2, 1]]
    return SurfaceMesh3D(verts, triangles)


def flat_disk_patch(
    n_seg: int = 48, n_ring: int = 10, radius: float = 1.0, z: float = 0.0
) -> tuple[SurfaceMesh3D, np.ndarray]:
    """Flat disk in the plane z = const with in-plane (inward radial) conormal."""
    radii = radius * np.arange(1, n_ring + 1) / n_ring
    mesh = _polar_patch(n_seg, n_ring, lambda x, y: np.full_like(x, z), radii)
    mu_out = np.zeros_like(mesh.vertices)
    for v in mesh.boundary_vertices:
        x, y = mesh.vertices[v, 0], mesh.vertices[v, 1]
        r = np.hypot(x, y)
        mu_out[v] = (-x / r, -y / r, 0.0)
    return mesh, mu_out


def tilt_disk_patch(
    n_seg: int = 48,
    n_ring: int = 10,
    radius: float = 1.0,
    tilt_deg: float = 45.0,
) -> tuple[SurfaceMesh3D, np.ndarray]:
    """Flat disk whose target conormal tilts out of plane by ``tilt_deg``.

    The target matches the continuation of a sphere touching the boundary
    circle at polar angle ``tilt_deg``, so the patch should relax toward a
    spherical cap.
    """
    mesh, mu_out = flat_disk_patch(n_seg, n_ring, radius)
    tilt = np.radians(tilt_deg)
    tilted = mu_out.copy()
    for v in mesh.boundary_vertices:
        inplane = mu_out[v]
        tilted[v] = np.cos(tilt) * inplane + np.sin(tilt) * np.array([0.0, 0.0, 1.0])
    return mesh, tilted


def spherical_cap_patch(
    theta0_deg: float = 60.0,
    n_seg: int = 48,
    n_ring: int = 10,
    radius: float = 1.0,
) -> tuple[SurfaceMesh3D, np.ndarray]:
    """Spherical cap around the north pole, boundary at polar angle theta0.

    mu_out is the sphere's own tangent direction at the boundary pointing
    toward the pole, so the cap is already compatible (stationary data).
    """
    theta0 = np.radians(theta0_deg)
    thetas = theta0 * np.arange(1, n_ring + 1) / n_ring

    def height(x, y):
        return np.sqrt(np.maximum(radius**2 - x**2 - y**2, 0.0))

    mesh = _polar_patch(n_seg, n_ring, height, radius * np.sin(thetas))
    mu_out = np.zeros_like(mesh.vertices)
    for v in mesh.boundary_vertices:
        x, y, _ = mesh.vertices[v]
        phi = np.arctan2(y, x)
        mu_out[v] = (
            -np.cos(theta0) * np.cos(phi),
            -np.cos(theta0) * np.sin(phi),
            np.sin(theta0),
        )
    return mesh, mu_out


def hemisphere_hole_patch(
    n_seg: int = 48, n_ring: int = 12, radius: float = 1.3
) -> tuple[SurfaceMesh3D, np.ndarray]:
    """Cone-fan starting patch for filling a hemispherical hole.

    The hole is the upper hemisphere of a radius-R sphere: the boundary is
    the equator circle and mu_out points straight up (the sphere's tangent
    at the equator toward the removed pole).  The initial patch is a fan
    cone with apex at height 2R whose Willmore energy starts above the
    spherical cap it relaxes to, with ring spacing crowded toward the
    boundary so the edge-length ratio also starts above its settled value.
    The default radius puts the slowest relaxation mode near critical
    damping for eps0 = 0.1, where the inertial run outpaces the plain
    damped one.
    """
    grading = (np.arange(1, n_ring + 1) / n_ring) ** 0.7
    radii = radius * grading
    mesh = _polar_patch(
        n_seg, n_ring, lambda x, y: 2.0 * radius - 2.0 * np.hypot(x, y), radii
    )
    mu_out = np.zeros_like(mesh.vertices)
    mu_out[mesh.boundary_vertices] = (0.0, 0.0, 1.0)
    return mesh, mu_out


def saddle_hole_patch(
    n_seg: int = 48,
    n_ring: int = 10,
    radius: float = 1.0,
    amplitude: float = 0.3,
) -> tuple[SurfaceMesh3D, np.ndarray]:
    """Patch spanning a saddle-shaped boundary curve z = A cos(2 phi).

    The initial patch interpolates the harmonic continuation
    z = A (x^2 - y^2) / r^2 and mu_out is the inward conormal of that
    surface along the boundary.
    """
    radii = radius * np.arange(1, n_ring + 1) / n_ring

    def height(x, y):
        return amplitude * (x**2 - y**2) / radius**2

    mesh = _polar_patch(n_seg, n_ring, height, radii)
    mu_out = np.zeros_like(mesh.vertices)
    for v in mesh.boundary_vertices:
        x, y, _ = mesh.vertices[v]
        normal = np.array(
            [-2.0 * amplitude * x / radius**2, 2.0 * amplitude * y / radius**2, 1.0]
        )
        phi = np.arctan2(y, x)
        tangent = np.array(
            [
                -radius * np.sin(phi),
                radius * np.cos(phi),
                -2.0 * amplitude * np.sin(2.0 * phi),
            ]
        )
        conormal = np.cross(normal, tangent)
        mu_out[v] = conormal / np.linalg.norm(conormal)
    return mesh, mu_out


def cylinder_patch(
    n_seg: int = 32, n_axial: int = 8, radius: float = 1.0, height: float = 2.0
) -> SurfaceMesh3D:
    """Open cylinder barrel around the z axis with outward orientation."""
    angles = 2.0 * np.pi * np.arange(n_seg) / n_seg
    vertices = []
    for k in range(n_axial + 1):
        z = height * k / n_axial
        for a in angles:
            vertices.append((radius * np.cos(a), radius * np.sin(a), z))
    triangles = []
    for k in range(n_axial):
        lo, hi = k * n_seg, (k + 1) * n_seg
        for i in range(n_seg):
            j = (i + 1) % n_seg
            triangles.append((lo + i, lo + j, hi + j))
            triangles.append((lo + i, hi + j, hi + i))
    return SurfaceMesh3D(np.asarray(vertices), np.asarray(triangles, dtype=np.int64))
