"""PDE-constrained shape functionals and their Eulerian derivatives.

Three models share one driver-facing interface:

- ``solve(mesh) -> state``: discrete state (and adjoint) fields.
- ``objective(mesh, state) -> float``: J on the given mesh.
- ``gradient(mesh, state) -> GradientFunctional``: per-dof vector g with
  dJ(mesh; v) = g . v for every nodal vector field v (component-major).
- ``free_vertex_mask(mesh)``: vertices allowed to move (all of them except
  where a model pins inflow/outflow/wall boundaries).
- ``conserves_volume``: whether the flow must project out the mean normal
  velocity each step.

A finite-difference oracle (:func:`fd_check`) validates each gradient
against re-solved objectives on perturbed meshes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from shapeflow import fem
from shapeflow.fem import (
    TRI_QUAD_BARY,
    TRI_QUAD_W,
    FeSpace,
    apply_dirichlet,
    element_geometry_2d,
    flatten_field,
    mass_matrix,
    p1_space,
    stiffness_matrix,
    stokes_blocks,
    unflatten_field,
)
from shapeflow.linalg import (
    SparseSystem,
    generalized_eigs,
    solve_saddle,
    solve_spd,
)
from shapeflow.mesh import SimplicialMesh2D, apply_flow_map
from shapeflow import fixtures


@dataclass(frozen=True)
class GradientFunctional:
    """Riesz right side of the shape derivative: dJ(mesh; v) = values . v."""

    values: np.ndarray

    def pair(self, field: np.ndarray) -> float:
        """Evaluate dJ along a nodal (nv, 2) vector field."""
        return float(self.values @ flatten_field(field))


def _quad_points(mesh: SimplicialMesh2D) -> tuple[np.ndarray, np.ndarray]:
    """Physical quadrature points (nt, nq, 2) and weights (nt, nq)."""
    corners = mesh.vertices[mesh.triangles]  # (nt, 3, 2)
    points = np.einsum("qi,tid->tqd", TRI_QUAD_BARY, corners)
    _, areas = element_geometry_2d(mesh)
    weights = areas[:, None] * TRI_QUAD_W[None, :]
    return points, weights


def assemble_load(mesh: SimplicialMesh2D, fn) -> np.ndarray:
    """Nodal load vector of int f phi_i with f evaluated analytically."""
    points, weights = _quad_points(mesh)
    values = fn(points[..., 0], points[..., 1])
    load = np.zeros(mesh.n_vertices)
    for i in range(3):
        np.add.at(
            load, mesh.triangles[:, i], (weights * values * TRI_QUAD_BARY[:, i]).sum(axis=1)
        )
    return load


def _boundary_vertex_mask(mesh: SimplicialMesh2D) -> np.ndarray:
    mask = np.zeros(mesh.n_vertices, dtype=bool)
    mask[np.unique(mesh.boundary_edges)] = True
    return mask


class ReconstructionModel:
    """Tracking functional J = 1/2 int (u - u_d)^2 with -Lap u + u = f, u = 0."""

    kind = "reconstruct"
    conserves_volume = False

    def __init__(self, u_d, grad_u_d, f):
        self.u_d = u_d
        self.grad_u_d = grad_u_d
        self.f = f

    def free_vertex_mask(self, mesh: SimplicialMesh2D) -> np.ndarray:
        return np.ones(mesh.n_vertices, dtype=bool)

    def _operator(self, mesh):
        K = stiffness_matrix(p1_space(mesh)).matrix
        M = mass_matrix(p1_space(mesh)).matrix
        return SparseSystem((K + M).tocsr(), spd=True), M

    def solve(self, mesh: SimplicialMesh2D) -> dict:
        system, M = self._operator(mesh)
        boundary = _boundary_vertex_mask(mesh)
        zero = np.zeros(mesh.n_vertices)

        rhs_state = assemble_load(mesh, self.f)
        sys_bc, rhs_bc = apply_dirichlet(system, rhs_state, boundary, zero)
        u = solve_spd(sys_bc, rhs_bc)

        rhs_adjoint = M @ u - assemble_load(mesh, self.u_d)
        _, rhs_adj_bc = apply_dirichlet(system, rhs_adjoint, boundary, zero)
        p = solve_spd(sys_bc, rhs_adj_bc)
        return {"u": u, "p": p}

    def objective(self, mesh: SimplicialMesh2D, state: dict) -> float:
        points, weights = _quad_points(mesh)
        u_h = np.einsum("qi,ti->tq", TRI_QUAD_BARY, state["u"][mesh.triangles])
        misfit = u_h - self.u_d(points[..., 0], points[..., 1])
        return float(0.5 * (weights * misfit**2).sum())

    def objective_by_expansion(self, mesh: SimplicialMesh2D, state: dict) -> float:
        """Same objective through 1/2 int u^2 - int u u_d + 1/2 int u_d^2.

        A structurally independent code path (mass-matrix quadratic form
        plus separate analytic-data integrals) used to cross-check
        :meth:`objective`.
        """
        u = state["u"]
        M = mass_matrix(p1_space(mesh)).matrix
        points, weights = _quad_points(mesh)
        ud = self.u_d(points[..., 0], points[..., 1])
        u_h = np.einsum("qi,ti->tq", TRI_QUAD_BARY, u[mesh.triangles])
        return float(
            0.5 * (u @ (M @ u)) - (weights * u_h * ud).sum() + 0.5 * (weights * ud**2).sum()
        )

    def gradient(self, mesh: SimplicialMesh2D, state: dict) -> GradientFunctional:
        u, p = state["u"], state["p"]
        grads, areas = element_geometry_2d(mesh)
        t = mesh.triangles
        points, weights = _quad_points(mesh)
        grad_u = np.einsum("tid,ti->td", grads, u[t])
        grad_p = np.einsum("tid,ti->td", grads, p[t])
        u_q = np.einsum("qi,ti->tq", TRI_QUAD_BARY, u[t])
        p_q = np.einsum("qi,ti->tq", TRI_QUAD_BARY, p[t])
        ud_q = self.u_d(points[..., 0], points[..., 1])
        dud_q = self.grad_u_d(points[..., 0], points[..., 1])  # (t, q, 2)
        f_q = self.f(points[..., 0], points[..., 1])
        misfit = u_q - ud_q

        # int (1/2 (u-u_d)^2 - grad u . grad p - u p) div v with div v constant.
        bulk = (
            (weights * (0.5 * misfit**2 - u_q * p_q)).sum(axis=1)
            - areas * np.einsum("td,td->t", grad_u, grad_p)
        )
        g = np.zeros((mesh.n_vertices, 2))
        for i in range(3):
            phi = TRI_QUAD_BARY[:, i]
            gi = grads[:, i]  # (t, 2)
            gi_gu = np.einsum("td,td->t", gi, grad_u)
            gi_gp = np.einsum("td,td->t", gi, grad_p)
            f_phi = (weights * f_q * phi).sum(axis=1)
            for a in range(2):
                term = areas * (grad_u[:, a] * gi_gp + gi_gu * grad_p[:, a])
                term -= grad_p[:, a] * f_phi
                term -= (weights * misfit * dud_q[..., a] * phi).sum(axis=1)
                term += bulk * gi[:, a]
                np.add.at(g[:, a], t[:, i], term)
        return GradientFunctional(flatten_field(g))


def recon_case1() -> ReconstructionModel:
    """Elliptic target 0.8 x^2 + 2.25 y^2 = 1 reachable from the unit disk.

    The source term is manufactured so the desired state solves the PDE
    exactly on the target ellipse, making zero misfit attainable.
    """

    def u_d(x, y):
        return 1.0 - 0.8 * x**2 - 2.25 * y**2

    def grad_u_d(x, y):
        return np.stack([-1.6 * x, -4.5 * y], axis=-1)

    def f(x, y):
        return 6.1 + u_d(x, y)

    return ReconstructionModel(u_d, grad_u_d, f)


def recon_case2() -> ReconstructionModel:
    """Elliptic target x^2 + 2.25 y^2 = 1 reachable from the L-shape."""

    def u_d(x, y):
        return 1.0 - x**2 - 2.25 * y**2

    def grad_u_d(x, y):
        return np.stack([-2.0 * x, -4.5 * y], axis=-1)

    def f(x, y):
        return 6.5 + u_d(x, y)

    return ReconstructionModel(u_d, grad_u_d, f)


class StokesDragModel:
    """Dissipation J = mu int |grad u|^2 for Stokes flow past an obstacle.

    Dirichlet inflow profile on the inlet marker, no-slip on walls and the
    obstacle, natural (do-nothing) outlet.  Only obstacle vertices move;
    the enclosed fluid volume is conserved by normal-velocity projection.
    """

    kind = "drag"
    conserves_volume = True

    def __init__(self, viscosity: float = 1.0, inflow=None):
        self.viscosity = viscosity
        if inflow is None:
            inflow = lambda x, y: np.stack(
                [-(y - 0.5) * (y + 0.5), np.zeros_like(y)], axis=-1
            )
        self.inflow = inflow

    def _marker_vertices(self, mesh: SimplicialMesh2D, markers) -> np.ndarray:
        if mesh.boundary_markers is None:
            raise fem.FemError("Stokes drag requires boundary markers")
        mask = np.zeros(mesh.n_vertices, dtype=bool)
        for m in markers:
            edges = mesh.boundary_edges[mesh.boundary_markers == m]
            mask[np.unique(edges)] = True
        return mask

    def free_vertex_mask(self, mesh: SimplicialMesh2D) -> np.ndarray:
        obstacle = self._marker_vertices(mesh, [fixtures.MARKER_OBSTACLE])
        pinned = self._marker_vertices(
            mesh,
            [fixtures.MARKER_INLET, fixtures.MARKER_WALL, fixtures.MARKER_OUTLET],
        )
        free = np.ones(mesh.n_vertices, dtype=bool)
        free[pinned & ~obstacle] = False
        return free

    def solve(self, mesh: SimplicialMesh2D) -> dict:
        needed = {fixtures.MARKER_INLET, fixtures.MARKER_WALL, fixtures.MARKER_OUTLET}
        if mesh.boundary_markers is None or not needed <= set(
            np.unique(mesh.boundary_markers).tolist()
        ):
            raise fem.FemError(
                "Stokes drag requires inlet/wall/outlet boundary markers"
            )
        velocity = fem.mini_space(mesh)
        pressure = p1_space(mesh)
        A, B = stokes_blocks(velocity, pressure, self.viscosity)
        system = fem.assemble_saddle(A, B)
        nv, nt = mesh.n_vertices, mesh.n_triangles
        block = nv + nt

        dirichlet_nodes = self._marker_vertices(
            mesh,
            [fixtures.MARKER_INLET, fixtures.MARKER_WALL, fixtures.MARKER_OBSTACLE],
        )
        inlet_nodes = self._marker_vertices(mesh, [fixtures.MARKER_INLET])
        values_nodes = np.zeros((nv, 2))
        coords = mesh.vertices[inlet_nodes]
        values_nodes[inlet_nodes] = self.inflow(coords[:, 0], coords[:, 1])
        # Walls and the obstacle override the profile at shared corners.
        hard_zero = self._marker_vertices(
            mesh, [fixtures.MARKER_WALL, fixtures.MARKER_OBSTACLE]
        )
        values_nodes[hard_zero] = 0.0

        mask = np.zeros(system.dim, dtype=bool)
        values = np.zeros(system.dim)
        for comp in range(2):
            sl = slice(comp * block, comp * block + nv)
            mask[sl] = dirichlet_nodes
            values[sl] = values_nodes[:, comp]
        rhs = np.zeros(system.dim)
        sys_bc, rhs_bc = apply_dirichlet(system, rhs, mask, values)
        u_dofs, p_dofs = solve_saddle(sys_bc, rhs_bc)
        return {"u": u_dofs, "p": p_dofs, "A": A}

    def objective(self, mesh: SimplicialMesh2D, state: dict) -> float:
        u = state["u"]
        return float(u @ (state["A"] @ u))

    def _velocity_gradients(self, mesh, u_dofs):
        """Velocity Jacobian du_k/dx_l at quadrature points: (nt, nq, 2, 2)."""
        grads, _ = element_geometry_2d(mesh)
        t = mesh.triangles
        nv, nt_count = mesh.n_vertices, mesh.n_triangles
        block = nv + nt_count
        jac = np.zeros((nt_count, len(TRI_QUAD_W), 2, 2))
        # Bubble gradient at barycentric point: 27 sum_k (prod of other lambdas) g_k.
        lam = TRI_QUAD_BARY  # (nq, 3)
        bubble_coef = 27.0 * np.stack(
            [lam[:, 1] * lam[:, 2], lam[:, 0] * lam[:, 2], lam[:, 0] * lam[:, 1]],
            axis=1,
        )  # (nq, 3)
        for k in range(2):
            nodal = u_dofs[k * block : k * block + nv]
            bub = u_dofs[k * block + nv : (k + 1) * block]
            const = np.einsum("tid,ti->td", grads, nodal[t])  # (nt, 2)
            jac[:, :, k, :] += const[:, None, :]
            jac[:, :, k, :] += bub[:, None, None] * np.einsum(
                "qi,tid->tqd", bubble_coef, grads
            )
        return jac

    def gradient(self, mesh: SimplicialMesh2D, state: dict) -> GradientFunctional:
        """Exact derivative of the discrete dissipation under vertex motion.

        Uses the self-adjoint structure of the dissipation functional, so
        no adjoint solve is needed: the energy term transports as
        mu (|grad u|^2 div v - sum_k grad u_k . (grad v + grad v^T) grad u_k)
        and the divergence constraint contributes the pressure term (the
        discrete counterpart of the classical -2 v . (grad u)^T grad p
        volume expression).
        """
        u_dofs, p = state["u"], state["p"]
        grads, areas = element_geometry_2d(mesh)
        t = mesh.triangles
        _, weights = _quad_points(mesh)
        jac = self._velocity_gradients(mesh, u_dofs)  # du_k/dx_l
        sq = np.einsum("tqkl,tqkl->tq", jac, jac)  # |grad u|^2 at points
        p_q = np.einsum("qi,ti->tq", TRI_QUAD_BARY, p[t])
        div_u = jac[:, :, 0, 0] + jac[:, :, 1, 1]
        p_div_u = (weights * p_q * div_u).sum(axis=1)  # (nt,)

        g = np.zeros((mesh.n_vertices, 2))
        mu = self.viscosity
        energy = mu * (weights * sq).sum(axis=1)  # (nt,)
        for i in range(3):
            gi = grads[:, i]  # (t, 2)
            # (g_i . grad) u_l at quadrature points: (t, q, l)
            gi_du = np.einsum("tqld,td->tql", jac, gi)
            # sum_k g_i[k] du_k/dx_b at quadrature points: (t, q, b)
            gi_ju = np.einsum("tqkb,tk->tqb", jac, gi)
            for a in range(2):
                term = energy * gi[:, a]
                term -= 2.0 * mu * (
                    weights * np.einsum("tql,tql->tq", jac[:, :, :, a], gi_du)
                ).sum(axis=1)
                # Divergence-constraint transport: -2 (div v p div u
                # - p sum_k dv_k/dx_l du_k/dx_l-type trace), v = phi_i e_a.
                term -= 2.0 * (
                    gi[:, a] * p_div_u
                    - (weights * p_q * gi_ju[:, :, a]).sum(axis=1)
                )
                np.add.at(g[:, a], t[:, i], term)
        gradient = flatten_field(g)
        # Only obstacle vertices may move; silence the pinned boundary dofs.
        free = self.free_vertex_mask(mesh)
        boundary = _boundary_vertex_mask(mesh)
        pinned = boundary & ~free
        nv = mesh.n_vertices
        gradient[np.concatenate([pinned, pinned])] = 0.0
        return GradientFunctional(gradient)


def drag_case1() -> StokesDragModel:
    return StokesDragModel(viscosity=1.0)


class EigenvalueModel:
    """Dirichlet-Laplacian eigenvalue minimization under a volume constraint.

    Minimizes the target eigenvalue lambda_ell; near-multiple eigenvalues
    (relative gap below gap_tol) are handled by averaging the derivative
    over the cluster.
    """

    kind = "eigen"
    conserves_volume = True

    def __init__(self, ell: int = 1, gap_tol: float = 1e-2):
        if ell < 1:
            raise ValueError("eigenvalue index is 1-based")
        self.ell = ell
        self.gap_tol = gap_tol
        self._warm: np.ndarray | None = None

    def free_vertex_mask(self, mesh: SimplicialMesh2D) -> np.ndarray:
        return np.ones(mesh.n_vertices, dtype=bool)

    def solve(self, mesh: SimplicialMesh2D) -> dict:
        K = stiffness_matrix(p1_space(mesh)).matrix
        M = mass_matrix(p1_space(mesh)).matrix
        interior = ~_boundary_vertex_mask(mesh)
        idx = np.flatnonzero(interior)
        K_ii = SparseSystem(K[np.ix_(idx, idx)].tocsr(), spd=True)
        M_ii = SparseSystem(M[np.ix_(idx, idx)].tocsr(), spd=True)
        count = min(self.ell + 3, K_ii.dim)
        warm = self._warm if self._warm is not None and self._warm.shape[0] == len(idx) else None
        values, vectors = generalized_eigs(K_ii, M_ii, count, initial=warm)
        self._warm = vectors
        full = np.zeros((mesh.n_vertices, count))
        full[idx] = vectors
        return {"values": values, "vectors": full}

    def objective(self, mesh: SimplicialMesh2D, state: dict) -> float:
        return float(state["values"][self.ell - 1])

    def _cluster(self, values: np.ndarray) -> list[int]:
        lam = values[self.ell - 1]
        return [
            k
            for k in range(len(values))
            if abs(values[k] - lam) <= self.gap_tol * abs(lam)
        ]

    def gradient(self, mesh: SimplicialMesh2D, state: dict) -> GradientFunctional:
        grads, areas = element_geometry_2d(mesh)
        t = mesh.triangles
        cluster = self._cluster(state["values"])
        g = np.zeros((mesh.n_vertices, 2))
        for k in cluster:
            u = state["vectors"][:, k]
            lam = state["values"][k]
            grad_u = np.einsum("tid,ti->td", grads, u[t])
            sq = np.einsum("td,td->t", grad_u, grad_u)
            # int u^2 per element, exact for P1 squares.
            ut = u[t]
            u2 = (areas / 6.0) * (
                ut[:, 0] ** 2
                + ut[:, 1] ** 2
                + ut[:, 2] ** 2
                + ut[:, 0] * ut[:, 1]
                + ut[:, 1] * ut[:, 2]
                + ut[:, 0] * ut[:, 2]
            )
            bulk = areas * sq - lam * u2
            gk = np.zeros((mesh.n_vertices, 2))
            for i in range(3):
                gi = grads[:, i]
                gi_gu = np.einsum("td,td->t", gi, grad_u)
                for a in range(2):
                    term = bulk * gi[:, a] - 2.0 * areas * grad_u[:, a] * gi_gu
                    np.add.at(gk[:, a], t[:, i], term)
            g += gk / len(cluster)
        return GradientFunctional(flatten_field(g))


def fd_check(model, mesh: SimplicialMesh2D, direction: np.ndarray, eps_list=None):
    """Finite-difference oracle for the assembled shape derivative.

    Compares dJ(mesh; v) against (J(mesh + eps v) - J(mesh)) / eps with the
    state re-solved on every perturbed mesh; returns the per-eps errors and
    the log-log slope (first-order consistency gives slope near 1).
    """
    if eps_list is None:
        eps_list = [1e-2, 1e-3, 1e-4, 1e-5]
    state = model.solve(mesh)
    base = model.objective(mesh, state)
    derivative = model.gradient(mesh, state).pair(direction)
    errors = []
    for eps in eps_list:
        moved = apply_flow_map(mesh, direction, eps)
        fd = (model.objective(moved, model.solve(moved)) - base) / eps
        errors.append(abs(fd - derivative))
    errors = np.asarray(errors)
    if np.all(errors < 1e-14):
        slope = 1.0  # exact agreement, e.g. zero direction
    else:
        logs = np.log(np.maximum(errors, 1e-300))
        slope = float(
            np.polyfit(np.log(np.asarray(eps_list, dtype=float)), logs, 1)[0]
        )
    return {"derivative": derivative, "errors": errors, "slope": slope}


def volume_project_scalar(
    points: np.ndarray, segments: np.ndarray, data: np.ndarray
) -> np.ndarray:
    """Subtract the arclength-mean so the weak normal flux vanishes exactly."""
    lengths = np.linalg.norm(points[segments[:, 1]] - points[segments[:, 0]], axis=1)
    node_weight = np.zeros(len(points))
    np.add.at(node_weight, segments[:, 0], lengths / 2.0)
    np.add.at(node_weight, segments[:, 1], lengths / 2.0)
    total = node_weight.sum()
    mean = (node_weight @ data) / total
    return data - mean


def volume_project_field(
    mesh: SimplicialMesh2D,
    field: np.ndarray,
    free: np.ndarray | None = None,
    target_flux: float = 0.0,
) -> np.ndarray:
    """Subtract c times the nodal normal on the free boundary from a bulk field.

    c is chosen so the facet-wise weak normal flux of the corrected field
    equals target_flux exactly (zero by default, which freezes the linear
    volume change; a time loop can pass the accumulated volume error over
    the step size to pay back the quadratic remainder of earlier steps).
    """
    C, boundary = fem.normal_trace_matrix(mesh)
    ones = np.ones(len(boundary))
    flux = ones @ (C @ flatten_field(field)) - target_flux
    nodal_normal = np.zeros((mesh.n_vertices, 2))
    p = mesh.vertices[mesh.boundary_edges[:, 0]]
    q = mesh.vertices[mesh.boundary_edges[:, 1]]
    lengths = np.linalg.norm(q - p, axis=1)
    tangents = (q - p) / lengths[:, None]
    normals = np.stack([tangents[:, 1], -tangents[:, 0]], axis=1)
    for col, w in ((mesh.boundary_edges[:, 0], lengths / 2.0), (mesh.boundary_edges[:, 1], lengths / 2.0)):
        np.add.at(nodal_normal, col, w[:, None] * normals)
    norms = np.linalg.norm(nodal_normal, axis=1)
    scaled = np.zeros_like(nodal_normal)
    active = norms > 0
    if free is not None:
        active &= free
    scaled[active] = nodal_normal[active] / norms[active, None]
    denom = ones @ (C @ flatten_field(scaled))
    if abs(denom) < 1e-14:
        return field
    corrected = field - (flux / denom) * scaled
    return corrected
