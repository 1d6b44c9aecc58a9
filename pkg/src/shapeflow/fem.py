"""Element-level assembly of every bilinear form used by the schemes.

Conventions
-----------
- Vector fields use component-major dof layout: all x-dofs, then all
  y-dofs (then z on surfaces).  :func:`flatten_field` / :func:`unflatten_field`
  convert between (n, d) arrays and flat dof vectors.
- P1 products are integrated with closed-form element formulas; bubble and
  curvature-weighted terms use a degree-4 triangle rule; curve terms use
  exact segment formulas or 2-point Gauss.
- Surface gradients are tangential: the affine gradient computed in an
  orthonormal in-plane frame and lifted back to R^3.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from shapeflow.linalg import SolverError, SparseSystem, solve_spd
from shapeflow.mesh import SimplicialMesh2D, SurfaceMesh3D, facet_normals


class FemError(ValueError):
    """Inconsistent space/mesh usage or unsupported form for a space kind."""


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

# Six-point symmetric triangle rule, exact through polynomial degree 4.
_A1, _W1 = 0.445948490915965, 0.223381589678011
_A2, _W2 = 0.091576213509771, 0.109951743655322
TRI_QUAD_BARY = np.array(
    [
        [1 - 2 * _A1, _A1, _A1],
        [_A1, 1 - 2 * _A1, _A1],
        [_A1, _A1, 1 - 2 * _A1],
        [1 - 2 * _A2, _A2, _A2],
        [_A2, 1 - 2 * _A2, _A2],
        [_A2, _A2, 1 - 2 * _A2],
    ]
)
TRI_QUAD_W = np.array([_W1, _W1, _W1, _W2, _W2, _W2])

# Two-point Gauss rule on [0, 1], exact through degree 3.
SEG_QUAD_X = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])
SEG_QUAD_W = np.array([0.5, 0.5])


def flatten_field(values: np.ndarray) -> np.ndarray:
    """(n, d) nodal field -> flat component-major dof vector."""
    return np.asarray(values, dtype=np.float64).T.ravel()


def unflatten_field(vector: np.ndarray, dim: int) -> np.ndarray:
    """Flat component-major dof vector -> (n, dim) nodal field."""
    return np.asarray(vector, dtype=np.float64).reshape(dim, -1).T


# ---------------------------------------------------------------------------
# Element geometry
# ---------------------------------------------------------------------------


def element_geometry_2d(mesh: SimplicialMesh2D) -> tuple[np.ndarray, np.ndarray]:
    """Per-triangle P1 hat gradients (nt, 3, 2) and areas (nt,)."""
    v, t = mesh.vertices, mesh.triangles
    p0, p1, p2 = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
    d1, d2 = p1 - p0, p2 - p0
    areas = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    grads = np.empty((len(t), 3, 2))
    # grad(lambda_i) = perp(p_{i+2} - p_{i+1}) / (2 A), perp = ccw rotation.
    for i in range(3):
        e = v[t[:, (i + 2) % 3]] - v[t[:, (i + 1) % 3]]
        grads[:, i, 0] = -e[:, 1]
        grads[:, i, 1] = e[:, 0]
    grads /= (2.0 * areas)[:, None, None]
    return grads, areas


def element_geometry_surface(mesh: SurfaceMesh3D) -> tuple[np.ndarray, np.ndarray]:
    """Per-triangle tangential hat gradients (nt, 3, 3) and areas (nt,)."""
    v, t = mesh.vertices, mesh.triangles
    p0, p1, p2 = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
    d1, d2 = p1 - p0, p2 - p0
    normal = np.cross(d1, d2)
    doubles = np.linalg.norm(normal, axis=1)
    areas = 0.5 * doubles
    nu = normal / doubles[:, None]
    grads = np.empty((len(t), 3, 3))
    # In-plane perpendicular of the opposite edge over twice the area.
    for i in range(3):
        e = v[t[:, (i + 2) % 3]] - v[t[:, (i + 1) % 3]]
        grads[:, i, :] = np.cross(nu, e)
    grads /= (2.0 * areas)[:, None, None]
    return grads, areas


def _geometry(mesh) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(mesh, SimplicialMesh2D):
        return element_geometry_2d(mesh)
    return element_geometry_surface(mesh)


# ---------------------------------------------------------------------------
# Spaces
# ---------------------------------------------------------------------------

_KINDS = {
    "p1": (2, 1, False),
    "p1v": (2, 2, False),
    "mini": (2, 2, True),
    "bp1": (2, 1, False),
    "bp1v": (2, 2, False),
    "sp1": (3, 1, False),
    "sp1v": (3, 3, False),
}


@dataclass(frozen=True)
class FeSpace:
    """A P1-family finite element space bound to a mesh.

    ``kind`` is one of p1 / p1v (planar scalar/vector), mini (planar vector
    + element bubble), bp1 / bp1v (boundary-curve scalar/vector), sp1 /
    sp1v (surface scalar/vector).  Boundary spaces number dofs over
    ``node_map`` (the sorted boundary vertices); vector spaces use the
    component-major layout of :func:`flatten_field`.
    """

    mesh: object
    kind: str
    dirichlet_mask: np.ndarray | None = field(default=None)
    dirichlet_values: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise FemError(f"unknown space kind {self.kind!r}")
        if self.dirichlet_mask is not None:
            mask = np.asarray(self.dirichlet_mask, dtype=bool)
            if mask.shape != (self.dof_count,):
                raise FemError("Dirichlet mask length must equal dof_count")
            values = self.dirichlet_values
            values = (
                np.zeros(self.dof_count)
                if values is None
                else np.asarray(values, dtype=np.float64)
            )
            if values.shape != (self.dof_count,):
                raise FemError("Dirichlet values length must equal dof_count")
            object.__setattr__(self, "dirichlet_mask", mask)
            object.__setattr__(self, "dirichlet_values", values)

    @property
    def n_components(self) -> int:
        return _KINDS[self.kind][1]

    @property
    def has_bubbles(self) -> bool:
        return _KINDS[self.kind][2]

    @property
    def node_map(self) -> np.ndarray:
        """Global vertex index per scalar dof (boundary kinds only)."""
        if self.kind in ("bp1", "bp1v"):
            return np.unique(self.mesh.boundary_edges)
        raise FemError(f"node_map undefined for kind {self.kind!r}")

    @property
    def block_size(self) -> int:
        """Scalar dofs per component."""
        if self.kind in ("bp1", "bp1v"):
            return len(self.node_map)
        base = self.mesh.n_vertices
        if self.has_bubbles:
            base += self.mesh.n_triangles
        return base

    @property
    def dof_count(self) -> int:
        return self.block_size * self.n_components

    def with_dirichlet(self, mask: np.ndarray, values=None) -> "FeSpace":
        return FeSpace(self.mesh, self.kind, mask, values)


def p1_space(mesh: SimplicialMesh2D) -> FeSpace:
    return FeSpace(mesh, "p1")


def p1_vector_space(mesh: SimplicialMesh2D) -> FeSpace:
    return FeSpace(mesh, "p1v")


def mini_space(mesh: SimplicialMesh2D) -> FeSpace:
    return FeSpace(mesh, "mini")


def boundary_scalar_space(mesh: SimplicialMesh2D) -> FeSpace:
    return FeSpace(mesh, "bp1")


def boundary_vector_space(mesh: SimplicialMesh2D) -> FeSpace:
    return FeSpace(mesh, "bp1v")


def surface_scalar_space(mesh: SurfaceMesh3D) -> FeSpace:
    return FeSpace(mesh, "sp1")


def surface_vector_space(mesh: SurfaceMesh3D) -> FeSpace:
    return FeSpace(mesh, "sp1v")


# ---------------------------------------------------------------------------
# Curve (boundary polygon) forms on raw arrays, reused by the BGN solver.
# ---------------------------------------------------------------------------


def _segment_lengths(points: np.ndarray, segments: np.ndarray) -> np.ndarray:
    d = points[segments[:, 1]] - points[segments[:, 0]]
    lengths = np.linalg.norm(d, axis=1)
    if np.any(lengths <= 0.0):
        raise FemError("degenerate curve segment")
    return lengths


def curve_mass(points: np.ndarray, segments: np.ndarray, n_dofs: int) -> sp.csr_matrix:
    """Arclength P1 mass: per segment (L/6) [[2, 1], [1, 2]]."""
    lengths = _segment_lengths(points, segments)
    a, b = segments[:, 0], segments[:, 1]
    rows = np.concatenate([a, b, a, b])
    cols = np.concatenate([a, b, b, a])
    vals = np.concatenate(
        [lengths / 3.0, lengths / 3.0, lengths / 6.0, lengths / 6.0]
    )
    return sp.coo_matrix((vals, (rows, cols)), shape=(n_dofs, n_dofs)).tocsr()


def curve_stiffness(
    points: np.ndarray, segments: np.ndarray, n_dofs: int
) -> sp.csr_matrix:
    """Arclength P1 stiffness: per segment (1/L) [[1, -1], [-1, 1]]."""
    lengths = _segment_lengths(points, segments)
    a, b = segments[:, 0], segments[:, 1]
    w = 1.0 / lengths
    rows = np.concatenate([a, b, a, b])
    cols = np.concatenate([a, b, b, a])
    vals = np.concatenate([w, w, -w, -w])
    return sp.coo_matrix((vals, (rows, cols)), shape=(n_dofs, n_dofs)).tocsr()


def curve_vector_form(scalar: sp.csr_matrix, dim: int) -> sp.csr_matrix:
    """Component-major block-diagonal lift of a scalar curve form."""
    return sp.block_diag([scalar] * dim).tocsr()


def curve_normal_coupling(
    points: np.ndarray, segments: np.ndarray, n_dofs: int
) -> sp.csr_matrix:
    """Rows i: segment integrals of (w . n) psi_i with facet-wise normals.

    Shape (n_dofs, 2 n_dofs), acting on component-major planar vector dofs.
    The facet normal is the clockwise rotation of the segment tangent.
    """
    lengths = _segment_lengths(points, segments)
    tangents = (points[segments[:, 1]] - points[segments[:, 0]]) / lengths[:, None]
    normals = np.stack([tangents[:, 1], -tangents[:, 0]], axis=1)
    rows, cols, vals = [], [], []
    a, b = segments[:, 0], segments[:, 1]
    for comp in range(2):
        for (ri, ci, w) in (
            (a, a, lengths / 3.0),
            (a, b, lengths / 6.0),
            (b, a, lengths / 6.0),
            (b, b, lengths / 3.0),
        ):
            rows.append(ri)
            cols.append(ci + comp * n_dofs)
            vals.append(w * normals[:, comp])
    return sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_dofs, 2 * n_dofs),
    ).tocsr()


def _boundary_polygon(space: FeSpace) -> tuple[np.ndarray, np.ndarray, int]:
    """Boundary points, locally indexed segments, and local dof count."""
    mesh = space.mesh
    node_map = space.node_map
    local = np.searchsorted(node_map, mesh.boundary_edges)
    return mesh.vertices[node_map], local, len(node_map)


# ---------------------------------------------------------------------------
# Bulk and surface forms
# ---------------------------------------------------------------------------


def _scalar_mass(mesh) -> sp.csr_matrix:
    _, areas = _geometry(mesh)
    t = mesh.triangles
    n = mesh.n_vertices
    rows, cols, vals = [], [], []
    for i in range(3):
        for j in range(3):
            rows.append(t[:, i])
            cols.append(t[:, j])
            vals.append(areas * ((2.0 if i == j else 1.0) / 12.0))
    return sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    ).tocsr()


def _scalar_stiffness(mesh) -> sp.csr_matrix:
    grads, areas = _geometry(mesh)
    t = mesh.triangles
    n = mesh.n_vertices
    rows, cols, vals = [], [], []
    for i in range(3):
        for j in range(3):
            rows.append(t[:, i])
            cols.append(t[:, j])
            vals.append(areas * np.einsum("td,td->t", grads[:, i], grads[:, j]))
    return sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    ).tocsr()


def _vector_block(scalar: sp.csr_matrix, dim: int) -> sp.csr_matrix:
    return sp.block_diag([scalar] * dim).tocsr()


def mass_matrix(space: FeSpace) -> SparseSystem:
    """L2 mass matrix of the space (SPD)."""
    if space.kind in ("p1", "sp1"):
        return SparseSystem(_scalar_mass(space.mesh), spd=True)
    if space.kind in ("p1v", "sp1v"):
        scalar = _scalar_mass(space.mesh)
        return SparseSystem(_vector_block(scalar, space.n_components), spd=True)
    if space.kind in ("bp1", "bp1v"):
        points, segments, n = _boundary_polygon(space)
        scalar = curve_mass(points, segments, n)
        if space.kind == "bp1":
            return SparseSystem(scalar, spd=True)
        return SparseSystem(curve_vector_form(scalar, 2), spd=True)
    raise FemError(f"mass matrix unsupported for kind {space.kind!r}")


def stiffness_matrix(space: FeSpace) -> SparseSystem:
    """Dirichlet-energy matrix: full, tangential, or arclength gradients."""
    if space.kind in ("p1", "sp1"):
        return SparseSystem(_scalar_stiffness(space.mesh), spd=False)
    if space.kind in ("p1v", "sp1v"):
        scalar = _scalar_stiffness(space.mesh)
        return SparseSystem(_vector_block(scalar, space.n_components), spd=False)
    if space.kind in ("bp1", "bp1v"):
        points, segments, n = _boundary_polygon(space)
        scalar = curve_stiffness(points, segments, n)
        if space.kind == "bp1":
            return SparseSystem(scalar, spd=False)
        return SparseSystem(curve_vector_form(scalar, 2), spd=False)
    raise FemError(f"stiffness matrix unsupported for kind {space.kind!r}")


def strain_form(space: FeSpace) -> SparseSystem:
    """Symmetric-gradient energy: entries A/2 (delta_ab g_i.g_j + g_i[b] g_j[a]).

    Positive semidefinite; rigid motions lie in the kernel.
    """
    if space.kind not in ("p1v", "sp1v"):
        raise FemError("strain form requires a P1 vector space")
    grads, areas = _geometry(space.mesh)
    t = space.mesh.triangles
    n = space.mesh.n_vertices
    d = space.n_components
    rows, cols, vals = [], [], []
    for i in range(3):
        for j in range(3):
            dots = np.einsum("td,td->t", grads[:, i], grads[:, j])
            for a in range(d):
                for b in range(d):
                    local = 0.5 * (
                        (dots if a == b else 0.0) + grads[:, i, b] * grads[:, j, a]
                    )
                    rows.append(t[:, i] + a * n)
                    cols.append(t[:, j] + b * n)
                    vals.append(areas * local)
    matrix = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n * d, n * d),
    ).tocsr()
    return SparseSystem(matrix, spd=False)


def normal_trace_matrix(mesh: SimplicialMesh2D) -> tuple[sp.csr_matrix, np.ndarray]:
    """Constraint rows C with (C w)_i = boundary integral of (w . n) phi_i.

    Returns (C, boundary_vertices): C has one row per boundary vertex
    (sorted order) and acts on component-major planar vector dofs (2 nv).
    Normals are facet-wise, so C applied to the dof vector of a rigid field
    reproduces that field's exact weak normal trace.
    """
    boundary = np.unique(mesh.boundary_edges)
    local = np.searchsorted(boundary, mesh.boundary_edges)
    p = mesh.vertices[mesh.boundary_edges[:, 0]]
    q = mesh.vertices[mesh.boundary_edges[:, 1]]
    lengths = np.linalg.norm(q - p, axis=1)
    tangents = (q - p) / lengths[:, None]
    normals = np.stack([tangents[:, 1], -tangents[:, 0]], axis=1)
    nv = mesh.n_vertices
    a_loc, b_loc = local[:, 0], local[:, 1]
    a_glob, b_glob = mesh.boundary_edges[:, 0], mesh.boundary_edges[:, 1]
    rows, cols, vals = [], [], []
    for comp in range(2):
        for (ri, ci, w) in (
            (a_loc, a_glob, lengths / 3.0),
            (a_loc, b_glob, lengths / 6.0),
            (b_loc, a_glob, lengths / 6.0),
            (b_loc, b_glob, lengths / 3.0),
        ):
            rows.append(ri)
            cols.append(ci + comp * nv)
            vals.append(w * normals[:, comp])
    C = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(boundary), 2 * nv),
    ).tocsr()
    return C, boundary


# ---------------------------------------------------------------------------
# MINI-element Stokes blocks
# ---------------------------------------------------------------------------


def stokes_blocks(
    velocity: FeSpace, pressure: FeSpace, viscosity: float
) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Gradient block A = mu int grad(u):grad(v) and B = -int q div(u).

    Velocity dofs are component-major [x nodes, x bubbles, y nodes,
    y bubbles]; the cubic bubble is 27 l1 l2 l3.  On affine triangles
    the node-bubble gradient coupling vanishes identically, the bubble
    diagonal is (729/180) A sum|g_k|^2, and the pressure-bubble block is
    0.45 A g_j (by parts: int b = 27 (2A)/5! per element, bubble zero on
    element edges).
    """
    if velocity.kind != "mini" or pressure.kind != "p1":
        raise FemError("stokes_blocks expects a MINI velocity and P1 pressure pair")
    if velocity.mesh is not pressure.mesh:
        raise FemError("velocity and pressure must share one mesh")
    mesh = velocity.mesh
    grads, areas = element_geometry_2d(mesh)
    t = mesh.triangles
    nv, nt = mesh.n_vertices, mesh.n_triangles
    block = nv + nt

    rows, cols, vals = [], [], []
    for i in range(3):
        for j in range(3):
            entry = viscosity * areas * np.einsum(
                "td,td->t", grads[:, i], grads[:, j]
            )
            for comp in range(2):
                rows.append(t[:, i] + comp * block)
                cols.append(t[:, j] + comp * block)
                vals.append(entry)
    bubble_diag = (
        viscosity * (729.0 / 180.0) * areas * np.einsum("tid,tid->t", grads, grads)
    )
    elems = np.arange(nt)
    for comp in range(2):
        rows.append(nv + elems + comp * block)
        cols.append(nv + elems + comp * block)
        vals.append(bubble_diag)
    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(2 * block, 2 * block),
    ).tocsr()

    rows, cols, vals = [], [], []
    for j in range(3):  # pressure node j of the element
        for i in range(3):  # velocity node i
            for comp in range(2):
                rows.append(t[:, j])
                cols.append(t[:, i] + comp * block)
                vals.append(-(areas / 3.0) * grads[:, i, comp])
        for comp in range(2):  # bubble dof of the element
            rows.append(t[:, j])
            cols.append(nv + elems + comp * block)
            vals.append(0.45 * areas * grads[:, j, comp])
    B = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(nv, 2 * block),
    ).tocsr()
    return A, B


def assemble_saddle(
    K: sp.csr_matrix, B: sp.csr_matrix, extra_rows: sp.csr_matrix | None = None
) -> SparseSystem:
    """Pack [[K, B^T], [B, 0]] (optionally with appended gauge rows) as one system."""
    blocks = [B] if extra_rows is None else [B, extra_rows]
    C = sp.vstack(blocks).tocsr()
    n, m = K.shape[0], C.shape[0]
    top = sp.hstack([K, C.T])
    bottom = sp.hstack([C, sp.csr_matrix((m, m))])
    matrix = sp.vstack([top, bottom]).tocsr()
    return SparseSystem(matrix, spd=False, n_primal=n)


def apply_dirichlet(
    system: SparseSystem, rhs: np.ndarray, mask: np.ndarray, values: np.ndarray
) -> tuple[SparseSystem, np.ndarray]:
    """Row/column elimination with symmetric right-hand-side correction.

    Constrained dofs get identity rows/columns and their prescribed value
    in the right side; the elimination keeps symmetry, and positive
    definiteness when the free block is definite.
    """
    mask = np.asarray(mask, dtype=bool)
    values = np.asarray(values, dtype=np.float64)
    A = system.matrix
    if mask.shape != (A.shape[0],):
        raise FemError("Dirichlet mask length must match the system dimension")
    lifted = np.where(mask, values, 0.0)
    new_rhs = rhs - A @ lifted
    new_rhs[mask] = values[mask]
    free = sp.diags((~mask).astype(np.float64))
    pinned = sp.diags(mask.astype(np.float64))
    reduced = (free @ A @ free + pinned).tocsr()
    return SparseSystem(reduced, spd=system.spd, n_primal=system.n_primal), new_rhs


# ---------------------------------------------------------------------------
# Surface normal projection and discrete mean curvature
# ---------------------------------------------------------------------------


def project_normals(mesh: SurfaceMesh3D) -> np.ndarray:
    """Nodal averaged unit normals: L2-project facet normals, renormalize."""
    normals = facet_normals(mesh)
    _, areas = element_geometry_surface(mesh)
    t = mesh.triangles
    n = mesh.n_vertices
    rhs = np.zeros((n, 3))
    weight = (areas / 3.0)[:, None] * normals
    for i in range(3):
        np.add.at(rhs, t[:, i], weight)
    mass = SparseSystem(_scalar_mass(mesh), spd=True)
    nbar = np.stack([solve_spd(mass, rhs[:, c]) for c in range(3)], axis=1)
    norms = np.linalg.norm(nbar, axis=1)
    if np.any(norms <= 0.0):
        raise FemError("projected normal vanished at a vertex")
    return nbar / norms[:, None]


def discrete_mean_curvature(mesh: SurfaceMesh3D, nbar: np.ndarray) -> np.ndarray:
    """Nodal H from the weak identity (mass) H = int (div_Gamma nbar) psi.

    Sum-of-principal-curvatures convention: a radius-R sphere with outward
    normals gives H ~ 2/R.
    """
    grads, areas = element_geometry_surface(mesh)
    t = mesh.triangles
    div = np.zeros(len(t))
    for i in range(3):
        div += np.einsum("td,td->t", grads[:, i], nbar[t[:, i]])
    rhs = np.zeros(mesh.n_vertices)
    np.add.at(rhs, t[:, 0], areas * div / 3.0)
    np.add.at(rhs, t[:, 1], areas * div / 3.0)
    np.add.at(rhs, t[:, 2], areas * div / 3.0)
    mass = SparseSystem(_scalar_mass(mesh), spd=True)
    return solve_spd(mass, rhs)
