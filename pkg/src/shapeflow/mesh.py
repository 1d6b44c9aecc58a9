"""Simplicial mesh containers for moving-mesh computations.

Two mesh types are provided: planar bulk triangulations
(:class:`SimplicialMesh2D`) and triangulated surfaces embedded in R^3
(:class:`SurfaceMesh3D`), both immutable after construction.  Boundary
topology is stored explicitly as oriented edge loops so that facet normals
follow a single rotation rule and so boundary integrals can be assembled
without re-deriving adjacency.

Free functions operate uniformly on both types where the geometry allows:
normals, mesh motion, enclosed measure, quality metrics, and file IO (OFF
and node/ele CSV pairs).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np


class MeshError(ValueError):
    """Invalid mesh data, file contents, or unsupported geometric query."""


class InversionError(MeshError):
    """Mesh motion produced non-positively-oriented elements.

    Attributes
    ----------
    elements : list of int
        Indices of the offending triangles.
    """

    def __init__(self, message: str, elements: list[int]):
        super().__init__(message)
        self.elements = list(elements)


def _frozen_array(values, dtype, shape_tail, what: str) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=dtype)
    if arr.ndim != 2 or arr.shape[1] != shape_tail:
        raise MeshError(f"{what} must have shape (n, {shape_tail}), got {arr.shape}")
    arr.setflags(write=False)
    return arr


def _directed_boundary_edges(triangles: np.ndarray) -> np.ndarray:
    """Directed edges appearing in exactly one triangle, in traversal order.

    Each counterclockwise triangle (a, b, c) contributes directed edges
    ab, bc, ca; interior edges occur twice in opposite directions and
    cancel.  The survivors keep the domain on their left, which is exactly
    the orientation convention of ``boundary_edges``.
    """
    a, b, c = triangles[:, 0], triangles[:, 1], triangles[:, 2]
    directed = np.concatenate(
        [np.stack([a, b], axis=1), np.stack([b, c], axis=1), np.stack([c, a], axis=1)]
    )
    undirected = np.sort(directed, axis=1)
    _, inverse, counts = np.unique(
        undirected, axis=0, return_inverse=True, return_counts=True
    )
    if counts.max(initial=1) > 2:
        bad = int(np.argmax(counts))
        raise MeshError(f"edge {tuple(np.unique(undirected, axis=0)[bad])} shared by more than two triangles")
    return directed[counts[inverse] == 1]


def _signed_areas_2d(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p0 = vertices[triangles[:, 0]]
    p1 = vertices[triangles[:, 1]]
    p2 = vertices[triangles[:, 2]]
    u, v = p1 - p0, p2 - p0
    return 0.5 * (u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])


def _triangle_areas_3d(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p0 = vertices[triangles[:, 0]]
    p1 = vertices[triangles[:, 1]]
    p2 = vertices[triangles[:, 2]]
    return 0.5 * np.linalg.norm(np.cross(p1 - p0, p2 - p0), axis=1)


def _check_indices(triangles: np.ndarray, n_vertices: int, what: str) -> None:
    if triangles.size and (triangles.min() < 0 or triangles.max() >= n_vertices):
        raise MeshError(f"{what} reference vertex indices outside [0, {n_vertices})")


@dataclass(frozen=True)
class SimplicialMesh2D:
    """Planar triangulation with oriented boundary loops.

    Parameters
    ----------
    vertices : (nv, 2) float array
    triangles : (nt, 3) int array
        Counterclockwise vertex triples (strictly positive signed area).
    boundary_edges : (ne, 2) int array
        Directed edges keeping the domain on their left; the outward
        normal of an edge is the 90-degree clockwise rotation of its
        tangent.  Outer loops therefore run counterclockwise and hole
        loops clockwise.
    boundary_markers : (ne,) int array, optional
        Integer label per boundary edge (for example inlet / wall /
        outlet / obstacle partitions).
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_markers: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "vertices", _frozen_array(self.vertices, np.float64, 2, "vertices")
        )
        object.__setattr__(
            self, "triangles", _frozen_array(self.triangles, np.int64, 3, "triangles")
        )
        object.__setattr__(
            self,
            "boundary_edges",
            _frozen_array(self.boundary_edges, np.int64, 2, "boundary_edges"),
        )
        if self.boundary_markers is not None:
            markers = np.ascontiguousarray(self.boundary_markers, dtype=np.int64)
            if markers.shape != (len(self.boundary_edges),):
                raise MeshError(
                    "boundary_markers must have one entry per boundary edge"
                )
            markers.setflags(write=False)
            object.__setattr__(self, "boundary_markers", markers)
        _check_indices(self.triangles, len(self.vertices), "triangles")
        _check_indices(self.boundary_edges, len(self.vertices), "boundary_edges")

        areas = _signed_areas_2d(self.vertices, self.triangles)
        inverted = np.flatnonzero(areas <= 0.0)
        if inverted.size:
            raise MeshError(
                f"{inverted.size} triangles are not counterclockwise "
                f"(first offenders {inverted[:5].tolist()})"
            )

        expected = _directed_boundary_edges(self.triangles)
        got = {tuple(e) for e in self.boundary_edges.tolist()}
        want = {tuple(e) for e in expected.tolist()}
        if got != want:
            raise MeshError(
                "boundary_edges do not match the topological boundary "
                f"({len(got - want)} spurious, {len(want - got)} missing)"
            )

    @classmethod
    def from_triangles(
        cls,
        vertices,
        triangles,
        boundary_markers: np.ndarray | None = None,
    ) -> "SimplicialMesh2D":
        """Build a mesh, deriving oriented boundary edges from the triangles."""
        vertices = np.asarray(vertices, dtype=np.float64)
        triangles = np.asarray(triangles, dtype=np.int64)
        edges = _directed_boundary_edges(triangles)
        return cls(vertices, triangles, edges, boundary_markers)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def boundary_vertex_indices(self) -> np.ndarray:
        """Sorted indices of vertices lying on the boundary."""
        return np.unique(self.boundary_edges)


@dataclass(frozen=True)
class SurfaceMesh3D:
    """Open or closed triangulated surface in R^3 with consistent orientation.

    ``boundary_edges`` are the directed edges of the boundary loops with the
    orientation induced by the triangles (surface on the left when viewed
    from the positive normal side); they are derived automatically.  A
    closed surface has no boundary edges.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(
            self, "vertices", _frozen_array(self.vertices, np.float64, 3, "vertices")
        )
        object.__setattr__(
            self, "triangles", _frozen_array(self.triangles, np.int64, 3, "triangles")
        )
        _check_indices(self.triangles, len(self.vertices), "triangles")

        derived = _directed_boundary_edges(self.triangles)
        if self.boundary_edges is None:
            edges = derived
        else:
            edges = np.ascontiguousarray(self.boundary_edges, dtype=np.int64)
            if {tuple(e) for e in edges.tolist()} != {
                tuple(e) for e in derived.tolist()
            }:
                raise MeshError("boundary_edges do not match the triangle topology")
        edges = np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2)
        edges.setflags(write=False)
        object.__setattr__(self, "boundary_edges", edges)

        self._check_orientation()
        areas = _triangle_areas_3d(self.vertices, self.triangles)
        degenerate = np.flatnonzero(areas <= 0.0)
        if degenerate.size:
            raise MeshError(
                f"degenerate (zero-area) triangles {degenerate[:5].tolist()}"
            )

    def _check_orientation(self):
        # Consistent orientation: every interior undirected edge must appear
        # once in each direction across its two incident triangles.
        t = self.triangles
        directed = np.concatenate(
            [t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]
        )
        seen = set()
        for a, b in directed.tolist():
            if (a, b) in seen:
                raise MeshError(
                    f"inconsistent orientation: directed edge ({a}, {b}) repeated"
                )
            seen.add((a, b))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def is_closed(self) -> bool:
        return len(self.boundary_edges) == 0

    @property
    def boundary_vertices(self) -> np.ndarray:
        """Sorted indices of vertices incident to boundary edges."""
        return np.unique(self.boundary_edges)


@dataclass(frozen=True)
class MeshQualityReport:
    """Global shape-quality metrics of a triangulation.

    ``min_angle`` is in degrees and lies in (0, 60]; ``max_aspect_ratio``
    is normalized so an equilateral triangle scores exactly 1;
    ``min_area_ratio`` is min over max element area in (0, 1];
    ``edge_length_ratio`` is the global max over min edge length.
    """

    min_angle: float
    max_aspect_ratio: float
    min_area_ratio: float
    edge_length_ratio: float


def _corner_points(mesh) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    v, t = mesh.vertices, mesh.triangles
    return v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]


def facet_normals(mesh) -> np.ndarray:
    """Unit outward normals of boundary edges (2D) or triangles (surface).

    For a planar mesh the normal of a directed boundary edge is the
    90-degree clockwise rotation of its unit tangent, which points out of
    the domain for both outer and hole loops.  For a surface the normal is
    the normalized cross product of the edge vectors in triangle order.
    """
    if isinstance(mesh, SimplicialMesh2D):
        p = mesh.vertices[mesh.boundary_edges[:, 0]]
        q = mesh.vertices[mesh.boundary_edges[:, 1]]
        tangent = q - p
        lengths = np.linalg.norm(tangent, axis=1)
        bad = np.flatnonzero(lengths <= 0.0)
        if bad.size:
            raise MeshError(f"degenerate boundary edge {bad[0]} has zero length")
        normals = np.stack([tangent[:, 1], -tangent[:, 0]], axis=1)
        return normals / lengths[:, None]
    if isinstance(mesh, SurfaceMesh3D):
        p0, p1, p2 = _corner_points(mesh)
        cross = np.cross(p1 - p0, p2 - p0)
        norms = np.linalg.norm(cross, axis=1)
        bad = np.flatnonzero(norms <= 0.0)
        if bad.size:
            raise MeshError(f"degenerate triangle {bad[0]} has zero area")
        return cross / norms[:, None]
    raise MeshError(f"unsupported mesh type {type(mesh).__name__}")


def apply_flow_map(mesh, displacement: np.ndarray, tau: float):
    """Move every vertex by ``tau`` times its displacement vector.

    Connectivity is preserved exactly.  Raises :class:`InversionError`
    listing the offending elements if any triangle inverts.  In 2D the
    signed area is checked along the whole traversal id + s*tau*w for
    s in [0, 1], not only at the endpoint: a fold mid-step (vertices
    crossing each other and coming back out positively oriented) still
    breaks injectivity of the flow map.  Surface triangles must keep a
    positive area and must not flip against their previous normal.
    """
    displacement = np.asarray(displacement, dtype=np.float64)
    if displacement.shape != mesh.vertices.shape:
        raise MeshError(
            f"displacement shape {displacement.shape} does not match "
            f"vertices {mesh.vertices.shape}"
        )
    new_vertices = mesh.vertices + tau * displacement

    if isinstance(mesh, SimplicialMesh2D):
        t = mesh.triangles
        p0, p1, p2 = (mesh.vertices[t[:, k]] for k in range(3))
        d0, d1, d2 = (tau * displacement[t[:, k]] for k in range(3))
        u, v = p1 - p0, p2 - p0
        du, dv = d1 - d0, d2 - d0

        def cross2(x, y):
            return x[:, 0] * y[:, 1] - x[:, 1] * y[:, 0]

        # Signed area at step fraction s is the quadratic a s^2 + b s + c.
        c = 0.5 * cross2(u, v)
        b = 0.5 * (cross2(u, dv) + cross2(du, v))
        a = 0.5 * cross2(du, dv)
        min_area = a + b + c
        concave_up = a > 0.0
        s_star = np.where(concave_up, -b / (2.0 * np.where(concave_up, a, 1.0)), 0.0)
        interior = concave_up & (s_star > 0.0) & (s_star < 1.0)
        min_area = np.where(interior, c - b * b / (4.0 * np.where(interior, a, 1.0)),
                            min_area)
        inverted = np.flatnonzero(min_area <= 0.0)
        if inverted.size:
            raise InversionError(
                f"flow map inverted {inverted.size} elements "
                f"(first offenders {inverted[:10].tolist()})",
                inverted.tolist(),
            )
        return SimplicialMesh2D(
            new_vertices, mesh.triangles, mesh.boundary_edges, mesh.boundary_markers
        )
    if isinstance(mesh, SurfaceMesh3D):
        p0, p1, p2 = _corner_points(mesh)
        old_normals = np.cross(p1 - p0, p2 - p0)
        q0 = new_vertices[mesh.triangles[:, 0]]
        q1 = new_vertices[mesh.triangles[:, 1]]
        q2 = new_vertices[mesh.triangles[:, 2]]
        new_normals = np.cross(q1 - q0, q2 - q0)
        flipped = np.flatnonzero(np.einsum("ij,ij->i", old_normals, new_normals) <= 0.0)
        if flipped.size:
            raise InversionError(
                f"flow map degenerated or flipped {flipped.size} surface elements "
                f"(first offenders {flipped[:10].tolist()})",
                flipped.tolist(),
            )
        return SurfaceMesh3D(new_vertices, mesh.triangles, mesh.boundary_edges)
    raise MeshError(f"unsupported mesh type {type(mesh).__name__}")


def enclosed_measure(mesh) -> float:
    """Area of a planar mesh or enclosed volume of a closed surface.

    The planar area is the sum of signed triangle areas; the volume uses
    the divergence theorem (sum of signed tetrahedron volumes against the
    origin), which is orientation-correct for outward-oriented surfaces.
    """
    if isinstance(mesh, SimplicialMesh2D):
        return float(_signed_areas_2d(mesh.vertices, mesh.triangles).sum())
    if isinstance(mesh, SurfaceMesh3D):
        if not mesh.is_closed:
            raise MeshError("enclosed volume is undefined for an open surface")
        p0, p1, p2 = _corner_points(mesh)
        return float(np.einsum("ij,ij->i", p0, np.cross(p1, p2)).sum() / 6.0)
    raise MeshError(f"unsupported mesh type {type(mesh).__name__}")


def quality_report(mesh) -> MeshQualityReport:
    """Compute global min angle, aspect ratio, area ratio, and edge ratio."""
    if mesh.n_triangles == 0:
        raise MeshError("quality_report of an empty mesh")
    p0, p1, p2 = _corner_points(mesh)
    e0 = np.linalg.norm(p2 - p1, axis=1)
    e1 = np.linalg.norm(p0 - p2, axis=1)
    e2 = np.linalg.norm(p1 - p0, axis=1)
    edges = np.stack([e0, e1, e2], axis=1)
    if isinstance(mesh, SimplicialMesh2D):
        areas = _signed_areas_2d(mesh.vertices, mesh.triangles)
    else:
        areas = _triangle_areas_3d(mesh.vertices, mesh.triangles)
    if np.any(areas <= 0.0) or np.any(edges <= 0.0):
        raise MeshError("degenerate triangles present")

    # Law of cosines per corner; clip guards roundoff at near-degenerate corners.
    def angle(opp, adj1, adj2):
        cosine = (adj1**2 + adj2**2 - opp**2) / (2.0 * adj1 * adj2)
        return np.degrees(np.arccos(np.clip(cosine, -1.0, 1.0)))

    angles = np.stack(
        [angle(e0, e1, e2), angle(e1, e2, e0), angle(e2, e0, e1)], axis=1
    )
    # Aspect ratio longest_edge / (2 sqrt(3) inradius), equal to 1 when
    # equilateral; inradius = area / semiperimeter.
    semi = edges.sum(axis=1) / 2.0
    inradius = areas / semi
    aspect = edges.max(axis=1) / (2.0 * np.sqrt(3.0) * inradius)
    return MeshQualityReport(
        min_angle=float(angles.min()),
        max_aspect_ratio=float(aspect.max()),
        min_area_ratio=float(areas.min() / areas.max()),
        edge_length_ratio=float(edges.max() / edges.min()),
    )


# ---------------------------------------------------------------------------
# File IO: OFF for surfaces and planar snapshots, node/ele CSV for planar
# meshes with boundary markers.
# ---------------------------------------------------------------------------


def _parse_error(path: str, line_no: int, message: str) -> MeshError:
    return MeshError(f"{os.path.basename(path)}: line {line_no}: {message}")


def write_off(mesh, path: str) -> None:
    """Write a mesh as ASCII OFF; planar vertices are padded with z = 0."""
    vertices = mesh.vertices
    if vertices.shape[1] == 2:
        vertices = np.concatenate(
            [vertices, np.zeros((len(vertices), 1))], axis=1
        )
    lines = ["OFF", f"{len(vertices)} {mesh.n_triangles} 0"]
    lines.extend("%.17g %.17g %.17g" % tuple(v) for v in vertices)
    lines.extend("3 %d %d %d" % tuple(t) for t in mesh.triangles)
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")


def read_off(path: str, *, planar: bool | None = None):
    """Read an ASCII OFF file.

    Returns a :class:`SimplicialMesh2D` when every z coordinate is exactly
    zero (or when ``planar=True``), otherwise a :class:`SurfaceMesh3D`.
    Errors carry the offending line number.
    """
    with open(path) as handle:
        raw = handle.read().splitlines()
    rows = [
        (i + 1, line.split("#", 1)[0].strip())
        for i, line in enumerate(raw)
    ]
    rows = [(no, text) for no, text in rows if text]
    if not rows or rows[0][1] != "OFF":
        raise _parse_error(path, rows[0][0] if rows else 1, "expected OFF header")
    if len(rows) < 2:
        raise _parse_error(path, rows[0][0], "missing counts line")
    no, counts = rows[1]
    parts = counts.split()
    if len(parts) != 3:
        raise _parse_error(path, no, f"expected three counts, got {counts!r}")
    try:
        nv, nf, _ = (int(p) for p in parts)
    except ValueError:
        raise _parse_error(path, no, f"non-integer counts {counts!r}") from None
    body = rows[2:]
    if len(body) < nv + nf:
        raise _parse_error(
            path, rows[-1][0], f"expected {nv} vertices and {nf} faces, file truncated"
        )
    vertices = np.empty((nv, 3))
    for k in range(nv):
        no, text = body[k]
        parts = text.split()
        if len(parts) != 3:
            raise _parse_error(path, no, f"expected 3 coordinates, got {text!r}")
        try:
            vertices[k] = [float(p) for p in parts]
        except ValueError:
            raise _parse_error(path, no, f"non-numeric coordinate in {text!r}") from None
    triangles = np.empty((nf, 3), dtype=np.int64)
    for k in range(nf):
        no, text = body[nv + k]
        parts = text.split()
        if len(parts) != 4 or parts[0] != "3":
            raise _parse_error(path, no, f"expected face line '3 i j k', got {text!r}")
        try:
            ijk = [int(p) for p in parts[1:]]
        except ValueError:
            raise _parse_error(path, no, f"non-integer vertex index in {text!r}") from None
        for idx in ijk:
            if idx < 0 or idx >= nv:
                raise _parse_error(
                    path, no, f"vertex index {idx} out of range [0, {nv})"
                )
        triangles[k] = ijk
    if planar is None:
        planar = bool(np.all(vertices[:, 2] == 0.0))
    if planar:
        if np.any(vertices[:, 2] != 0.0):
            raise _parse_error(path, 1, "planar read requested but z coordinates are nonzero")
        return SimplicialMesh2D.from_triangles(vertices[:, :2], triangles)
    return SurfaceMesh3D(vertices, triangles)


def _csv_pair(path: str) -> tuple[str, str]:
    for suffix in (".node.csv", ".ele.csv"):
        if path.endswith(suffix):
            base = path[: -len(suffix)]
            return base + ".node.csv", base + ".ele.csv"
    raise MeshError(
        f"CSV mesh paths must end in .node.csv or .ele.csv, got {path!r}"
    )


def write_csv_pair(mesh: SimplicialMesh2D, path: str) -> None:
    """Write a planar mesh as a node/ele CSV pair.

    Boundary-edge markers are encoded on nodes: each boundary vertex has
    exactly one outgoing directed boundary edge, so storing that edge's
    marker on its source vertex is lossless.  Interior vertices get 0.
    """
    node_path, ele_path = _csv_pair(path)
    node_markers = np.zeros(mesh.n_vertices, dtype=np.int64)
    if mesh.boundary_markers is not None:
        node_markers[mesh.boundary_edges[:, 0]] = mesh.boundary_markers
    with open(node_path, "w") as handle:
        handle.write("x,y,marker\n")
        for (x, y), m in zip(mesh.vertices, node_markers):
            handle.write("%.17g,%.17g,%d\n" % (x, y, m))
    with open(ele_path, "w") as handle:
        handle.write("v0,v1,v2\n")
        for a, b, c in mesh.triangles:
            handle.write("%d,%d,%d\n" % (a, b, c))


def read_csv_pair(path: str) -> SimplicialMesh2D:
    """Read a planar mesh from a node/ele CSV pair (see :func:`write_csv_pair`)."""
    node_path, ele_path = _csv_pair(path)
    vertices, node_markers = _read_node_csv(node_path)
    triangles = _read_ele_csv(ele_path, len(vertices))
    mesh = SimplicialMesh2D.from_triangles(vertices, triangles)
    if node_markers is None:
        return mesh
    markers = node_markers[mesh.boundary_edges[:, 0]]
    return SimplicialMesh2D(
        mesh.vertices, mesh.triangles, mesh.boundary_edges, markers
    )


def _read_node_csv(path: str) -> tuple[np.ndarray, np.ndarray | None]:
    with open(path) as handle:
        lines = handle.read().splitlines()
    if not lines:
        raise _parse_error(path, 1, "empty node file")
    header = [h.strip() for h in lines[0].split(",")]
    if header not in (["x", "y"], ["x", "y", "marker"]):
        raise _parse_error(path, 1, f"expected header 'x,y[,marker]', got {lines[0]!r}")
    has_marker = len(header) == 3
    coords, markers = [], []
    for no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise _parse_error(path, no, f"expected {len(header)} fields, got {line!r}")
        try:
            coords.append((float(parts[0]), float(parts[1])))
            if has_marker:
                markers.append(int(parts[2]))
        except ValueError:
            raise _parse_error(path, no, f"malformed row {line!r}") from None
    vertices = np.asarray(coords, dtype=np.float64)
    return vertices, (np.asarray(markers, dtype=np.int64) if has_marker else None)


def _read_ele_csv(path: str, n_vertices: int) -> np.ndarray:
    with open(path) as handle:
        lines = handle.read().splitlines()
    if not lines or [h.strip() for h in lines[0].split(",")] != ["v0", "v1", "v2"]:
        raise _parse_error(path, 1, "expected header 'v0,v1,v2'")
    triangles = []
    for no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise _parse_error(path, no, f"expected 3 fields, got {line!r}")
        try:
            ijk = [int(p) for p in parts]
        except ValueError:
            raise _parse_error(path, no, f"non-integer index in {line!r}") from None
        for idx in ijk:
            if idx < 0 or idx >= n_vertices:
                raise _parse_error(
                    path, no, f"vertex index {idx} out of range [0, {n_vertices})"
                )
        triangles.append(ijk)
    return np.asarray(triangles, dtype=np.int64)


def read_mesh(path: str, *, planar: bool | None = None):
    """Read a mesh, dispatching on the file suffix (.off or .node/.ele.csv)."""
    if path.endswith(".off"):
        return read_off(path, planar=planar)
    return read_csv_pair(path)


def write_mesh(mesh, path: str) -> None:
    """Write a mesh, dispatching on the file suffix (.off or .node/.ele.csv)."""
    if path.endswith(".off"):
        write_off(mesh, path)
        return
    if not isinstance(mesh, SimplicialMesh2D):
        raise MeshError("CSV pairs store planar meshes only")
    write_csv_pair(mesh, path)
