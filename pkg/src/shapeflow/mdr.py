"""Minimal-deformation-rate extension of boundary velocity data.

Extends a boundary normal speed (or full boundary velocity) into the bulk
by minimizing the strain energy 1/2 int |eps(w)|^2 subject to facet-wise
weak normal-trace constraints on the boundary.  Compared with harmonic
extension this distributes deformation more evenly and preserves mesh
quality longer, at the price of a saddle-point solve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from shapeflow import fem
from shapeflow.fem import (
    apply_dirichlet,
    assemble_saddle,
    flatten_field,
    normal_trace_matrix,
    p1_space,
    p1_vector_space,
    strain_form,
    stiffness_matrix,
    unflatten_field,
)
from shapeflow.linalg import SparseSystem, solve_saddle, solve_spd
from shapeflow.mesh import SimplicialMesh2D


@dataclass(frozen=True)
class MdrSolution:
    """Bulk velocity, boundary multiplier, and strain energy of the extension."""

    velocity: np.ndarray  # (nv, 2)
    multiplier: np.ndarray  # one value per constrained boundary vertex
    energy: float
    gauge_added: bool


def _rotation_field(mesh: SimplicialMesh2D) -> np.ndarray:
    center = mesh.vertices.mean(axis=0)
    rel = mesh.vertices - center
    return np.stack([-rel[:, 1], rel[:, 0]], axis=1)


def _circulation_row(mesh: SimplicialMesh2D, boundary: np.ndarray) -> sp.csr_matrix:
    """Row functional of the boundary circulation: contour integral of w . t."""
    nv = mesh.n_vertices
    row = np.zeros(2 * nv)
    p = mesh.vertices[mesh.boundary_edges[:, 0]]
    q = mesh.vertices[mesh.boundary_edges[:, 1]]
    tangents = q - p  # length-weighted
    for end in range(2):
        idx = mesh.boundary_edges[:, end]
        np.add.at(row[:nv], idx, 0.5 * tangents[:, 0])
        np.add.at(row[nv:], idx, 0.5 * tangents[:, 1])
    return sp.csr_matrix(row.reshape(1, -1))


def solve_mdr(
    mesh: SimplicialMesh2D,
    data: np.ndarray,
    rtol: float = 1e-10,
) -> MdrSolution:
    """Extend boundary data with minimal strain energy.

    data may be a scalar normal speed per boundary vertex (ordered by
    sorted global vertex index) or a full velocity field of shape
    (n_boundary, 2) or (n_vertices, 2); vector data is reproduced exactly
    whenever it is a rigid motion (zero strain energy).

    The strain form is singular on rigid motions; translations are fixed
    by the constraints themselves, and when the boundary geometry makes
    the rotation nearly invisible to the facet-normal constraints
    (symmetric boundary rings cancel it to roundoff) a zero-circulation
    gauge row is appended. Without the gauge the saddle system is
    near-singular along the rotation and the returned field picks up an
    arbitrary rotation component even though energy and multiplier stay
    correct.
    """
    C, boundary = normal_trace_matrix(mesh)
    nb = len(boundary)
    S = strain_form(p1_vector_space(mesh)).matrix

    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        if data.shape[0] != nb:
            raise fem.FemError(
                f"scalar data needs one value per boundary vertex ({nb})"
            )
        rhs_c = _boundary_mass(mesh, boundary) @ data
    elif data.ndim == 2 and data.shape[1] == 2:
        if data.shape[0] == nb:
            full = np.zeros((mesh.n_vertices, 2))
            full[boundary] = data
        elif data.shape[0] == mesh.n_vertices:
            full = data
        else:
            raise fem.FemError("vector data must cover boundary or all vertices")
        rhs_c = C @ flatten_field(full)
    else:
        raise fem.FemError("data must be scalar per boundary vertex or (n, 2)")

    rot = flatten_field(_rotation_field(mesh))
    scale = sp.linalg.norm(C) * np.linalg.norm(rot)
    # Symmetric boundary rings see rotation only through roundoff (<=1e-6
    # relative); any genuine asymmetry shows up at 1e-3 or more.
    gauge = float(np.linalg.norm(C @ rot)) <= 1e-5 * scale
    extra = _circulation_row(mesh, boundary) if gauge else None
    system = assemble_saddle(S, sp.vstack([C]).tocsr(), extra_rows=extra)
    rhs = np.zeros(system.dim)
    rhs[system.n_primal : system.n_primal + nb] = rhs_c
    w_flat, lam = solve_saddle(system, rhs, tol=rtol)
    velocity = unflatten_field(w_flat, 2)
    energy = 0.5 * float(w_flat @ (S @ w_flat))
    # Sign convention: strain virtual work equals + contour(kappa n . eta).
    return MdrSolution(
        velocity=velocity,
        multiplier=-lam[:nb],
        energy=energy,
        gauge_added=gauge,
    )


def _boundary_mass(mesh: SimplicialMesh2D, boundary: np.ndarray) -> sp.csr_matrix:
    """Curve mass matrix on the boundary in sorted-global-vertex ordering."""
    lookup = {g: i for i, g in enumerate(boundary)}
    segments = np.array(
        [[lookup[a], lookup[b]] for a, b in mesh.boundary_edges], dtype=np.int64
    )
    return fem.curve_mass(mesh.vertices[boundary], segments, len(boundary))


def harmonic_extension(
    mesh: SimplicialMesh2D, boundary_values: np.ndarray, rtol: float = 1e-10
) -> np.ndarray:
    """Componentwise harmonic extension of prescribed boundary velocity."""
    boundary = mesh.boundary_vertex_indices()
    values = np.asarray(boundary_values, dtype=float)
    if values.shape == (len(boundary), 2):
        full = np.zeros((mesh.n_vertices, 2))
        full[boundary] = values
    elif values.shape == (mesh.n_vertices, 2):
        full = values
    else:
        raise fem.FemError("boundary_values must be (n_boundary, 2) or (nv, 2)")
    mask = np.zeros(mesh.n_vertices, dtype=bool)
    mask[boundary] = True
    K = stiffness_matrix(p1_space(mesh))
    out = np.zeros((mesh.n_vertices, 2))
    for comp in range(2):
        sys_bc, rhs_bc = apply_dirichlet(
            SparseSystem(K.matrix, spd=True),
            np.zeros(mesh.n_vertices),
            mask,
            full[:, comp],
        )
        out[:, comp] = solve_spd(sys_bc, rhs_bc, tol=rtol)
    return out
