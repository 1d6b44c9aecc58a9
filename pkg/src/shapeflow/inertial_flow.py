"""Damped second-order (inertial) H1 gradient-flow time stepping.

Each step solves an SPD system for the new inertial velocity:

    [(eps0/2 tau)(M_n + M_prev) + eta(t_n)(M_n + K_n)] w_new
        = (eps0/tau) M_prev w_old - g,

where M/K are vector mass/stiffness matrices on the current and previous
meshes and g is the assembled shape-derivative functional.  Because the
mesh update is Lagrangian (vertices track the flow map), previous-mesh
integrals of composed fields reduce to plain previous-mesh matrix
products on shared nodal vectors.  The damping eta(t) = c/(t + t0) makes
the dynamics overdamped early and increasingly inertial later; eps0 = 0
reduces the step exactly to the first-order flow eta (M + K) w = -g.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from shapeflow.fem import (
    apply_dirichlet,
    flatten_field,
    mass_matrix,
    p1_vector_space,
    stiffness_matrix,
    unflatten_field,
)
from shapeflow.linalg import SparseSystem
from shapeflow.linalg import solve_spd
from shapeflow.mesh import SimplicialMesh2D, apply_flow_map
from shapeflow.models import GradientFunctional


def damping(t: float, c: float = 1.0, t0: float = 1.0) -> float:
    """Damping schedule eta(t) = c / (t + t0), strictly decreasing in t."""
    if c <= 0 or t0 <= 0:
        raise ValueError("damping constants c and t0 must be positive")
    return c / (t + t0)


@dataclass(frozen=True)
class EnergyRecord:
    """Per-step energy bookkeeping: mechanical = J + kinetic exactly."""

    time: float
    objective: float
    kinetic: float
    mechanical: float
    eta: float


@dataclass(frozen=True)
class FlowState:
    """Meshes, velocities, and clock of one inertial-flow run."""

    mesh: SimplicialMesh2D
    prev_mesh: SimplicialMesh2D
    w_tilde: np.ndarray  # inertial velocity (nv, 2), shared nodal indexing
    mesh_velocity: np.ndarray  # velocity that produced the current mesh
    step: int
    time: float
    eps0: float
    c: float
    t0: float
    tau: float
    # When set, overrides the c/(t+t0) schedule; the first-order flow runs
    # with constant unit damping.
    constant_eta: float | None = None

    def __post_init__(self):
        if self.eps0 < 0:
            raise ValueError("eps0 must be nonnegative")
        if self.tau <= 0:
            raise ValueError("time step must be positive")
        if self.constant_eta is not None and self.constant_eta <= 0:
            raise ValueError("constant damping must be positive")
        if self.mesh.n_vertices != self.prev_mesh.n_vertices:
            raise ValueError("current and previous meshes must share vertices")

    @classmethod
    def initial(
        cls,
        mesh: SimplicialMesh2D,
        eps0: float = 1.0,
        c: float = 1.0,
        t0: float = 1.0,
        tau: float = 0.02,
        constant_eta: float | None = None,
    ) -> "FlowState":
        zeros = np.zeros((mesh.n_vertices, 2))
        return cls(
            mesh=mesh,
            prev_mesh=mesh,
            w_tilde=zeros,
            mesh_velocity=zeros.copy(),
            step=0,
            time=0.0,
            eps0=eps0,
            c=c,
            t0=t0,
            tau=tau,
            constant_eta=constant_eta,
        )

    @property
    def flow_displacement(self) -> np.ndarray:
        """Per-vertex displacement mapping the previous mesh to the current."""
        return self.mesh.vertices - self.prev_mesh.vertices

    def eta(self) -> float:
        if self.constant_eta is not None:
            return self.constant_eta
        return damping(self.time, self.c, self.t0)


def inertial_step(
    state: FlowState,
    g: GradientFunctional | np.ndarray,
    fixed_mask: np.ndarray | None = None,
) -> np.ndarray:
    """Solve for the next inertial velocity on the current mesh.

    fixed_mask marks vertices whose velocity is pinned to zero (e.g. the
    non-moving boundaries of the drag problem).
    """
    rhs_g = g.values if isinstance(g, GradientFunctional) else np.asarray(g)
    mesh = state.mesh
    nv = mesh.n_vertices
    if rhs_g.shape != (2 * nv,):
        raise ValueError("gradient vector does not match the current mesh")
    eta = state.eta()
    space_n = p1_vector_space(mesh)
    M_n = mass_matrix(space_n).matrix
    K_n = stiffness_matrix(space_n).matrix
    lhs = eta * (M_n + K_n)
    rhs = -rhs_g
    if state.eps0 > 0:
        M_p = mass_matrix(p1_vector_space(state.prev_mesh)).matrix
        lhs = lhs + (state.eps0 / (2.0 * state.tau)) * (M_n + M_p)
        rhs = rhs + (state.eps0 / state.tau) * (M_p @ flatten_field(state.w_tilde))
    system = SparseSystem(lhs.tocsr(), spd=True)
    if fixed_mask is not None:
        mask = np.concatenate([fixed_mask, fixed_mask])
        system, rhs = apply_dirichlet(system, rhs, mask, np.zeros(2 * nv))
    w_flat = solve_spd(system, rhs)
    return unflatten_field(w_flat, 2)


def kinetic_energy(state: FlowState, w_tilde: np.ndarray | None = None) -> float:
    """(eps0/2) L2-norm squared of the inertial velocity on the current mesh."""
    if state.eps0 == 0:
        return 0.0
    w = state.w_tilde if w_tilde is None else w_tilde
    M = mass_matrix(p1_vector_space(state.mesh)).matrix
    flat = flatten_field(w)
    return 0.5 * state.eps0 * float(flat @ (M @ flat))


def mechanical_energy(
    state: FlowState,
    model,
    solution: dict | None = None,
    objective: float | None = None,
) -> EnergyRecord:
    """Energy record at the current step; re-solves the model if needed."""
    if objective is None:
        if solution is None:
            solution = model.solve(state.mesh)
        objective = model.objective(state.mesh, solution)
    kin = kinetic_energy(state)
    return EnergyRecord(
        time=state.time,
        objective=float(objective),
        kinetic=kin,
        mechanical=float(objective) + kin,
        eta=state.eta(),
    )


def advance(
    state: FlowState,
    mesh_velocity: np.ndarray,
    w_tilde_next: np.ndarray | None = None,
) -> FlowState:
    """Move vertices by tau times the mesh velocity and shift the clock.

    w_tilde_next is the inertial velocity produced by :func:`inertial_step`;
    in pure-inertial mode (no bulk extension) it doubles as the mesh
    velocity and may be omitted.
    """
    if w_tilde_next is None:
        w_tilde_next = mesh_velocity
    new_mesh = apply_flow_map(state.mesh, mesh_velocity, state.tau)
    return replace(
        state,
        mesh=new_mesh,
        prev_mesh=state.mesh,
        w_tilde=np.asarray(w_tilde_next, dtype=float),
        mesh_velocity=np.asarray(mesh_velocity, dtype=float),
        step=state.step + 1,
        time=state.time + state.tau,
    )
