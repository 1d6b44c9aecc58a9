"""Inertial (damped second-order) flow stepping tests."""

import numpy as np
import pytest

from shapeflow import fem, fixtures
from shapeflow.fem import flatten_field, mass_matrix, p1_vector_space, stiffness_matrix
from shapeflow.inertial_flow import (
    FlowState,
    advance,
    damping,
    inertial_step,
    kinetic_energy,
    mechanical_energy,
)
from shapeflow.linalg import SparseSystem, solve_spd
from shapeflow.models import GradientFunctional


def smooth_gradient(mesh) -> np.ndarray:
    """A smooth, mesh-sized dual vector standing in for a shape derivative."""
    x, y = mesh.vertices[:, 0], mesh.vertices[:, 1]
    field = np.column_stack([np.sin(x) * np.cos(y), np.cos(2.0 * x) * y])
    M = mass_matrix(p1_vector_space(mesh)).matrix
    return M @ flatten_field(field)


def unit_square_two_triangles():
    from shapeflow.mesh import SimplicialMesh2D

    vertices = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    return SimplicialMesh2D.from_triangles(vertices, [(0, 1, 2), (0, 2, 3)])


class TestDamping:
    def test_reference_values(self):
        assert damping(0.0, c=1.0, t0=1.0) == 1.0
        assert damping(5.0, c=2.0, t0=1.0) == 1.0 / 3.0

    def test_strictly_decreasing(self):
        times = np.linspace(0.0, 10.0, 60)
        values = [damping(t, c=3.0, t0=0.5) for t in times]
        assert all(a > b for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("c,t0", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (1.0, -2.0)])
    def test_nonpositive_constants_rejected(self, c, t0):
        with pytest.raises(ValueError):
            damping(1.0, c=c, t0=t0)


class TestFirstOrderReduction:
    def test_eps0_zero_matches_direct_first_order_solve(self):
        mesh = fixtures.graded_disk()
        state = FlowState.initial(mesh, eps0=0.0, c=1.0, t0=1.0, tau=0.02)
        g = smooth_gradient(mesh)
        w = inertial_step(state, g)

        space = p1_vector_space(mesh)
        lhs = state.eta() * (mass_matrix(space).matrix + stiffness_matrix(space).matrix)
        direct = solve_spd(SparseSystem(lhs.tocsr(), spd=True), -g)
        assert np.array_equal(flatten_field(w), direct)

    def test_eps0_zero_ignores_stale_velocity(self):
        mesh = fixtures.graded_disk()
        state = FlowState.initial(mesh, eps0=0.0, tau=0.02)
        g = smooth_gradient(mesh)
        baseline = inertial_step(state, g)
        from dataclasses import replace

        polluted = replace(state, w_tilde=np.ones_like(state.w_tilde))
        assert np.array_equal(inertial_step(polluted, g), baseline)


class TestInertialStep:
    def test_zero_gradient_and_zero_velocity_stay_zero(self):
        mesh = fixtures.graded_disk()
        state = FlowState.initial(mesh, eps0=1.0, tau=0.02)
        w = inertial_step(state, np.zeros(2 * mesh.n_vertices))
        assert not np.any(w)

    def test_momentum_contracts_in_mass_norm_without_forcing(self):
        # With g = 0 the update is (I + (tau eta / eps0) M^-1 (M+K)) w = w_old,
        # so the mass norm of the velocity cannot grow.
        mesh = fixtures.graded_disk()
        state = FlowState.initial(mesh, eps0=1.0, c=1.0, t0=1.0, tau=0.05)
        rng = np.random.default_rng(4)
        from dataclasses import replace

        w_old = rng.standard_normal(state.w_tilde.shape)
        state = replace(state, w_tilde=w_old)
        w_new = inertial_step(state, np.zeros(2 * mesh.n_vertices))
        M = mass_matrix(p1_vector_space(mesh)).matrix

        def mass_norm(w):
            flat = flatten_field(w)
            return float(flat @ (M @ flat))

        assert mass_norm(w_new) < mass_norm(w_old)

    def test_stronger_damping_shrinks_energy_norm(self):
        # The envelope theorem for the quadratic minimization makes the
        # (M+K)-seminorm of the solution non-increasing in eta.
        mesh = fixtures.graded_disk()
        g = smooth_gradient(mesh)
        space = p1_vector_space(mesh)
        B = (mass_matrix(space).matrix + stiffness_matrix(space).matrix).tocsr()

        def energy_norm(c):
            state = FlowState.initial(mesh, eps0=1.0, c=c, t0=1.0, tau=0.02)
            flat = flatten_field(inertial_step(state, g))
            return float(flat @ (B @ flat))

        norms = [energy_norm(c) for c in (0.5, 1.0, 2.0, 4.0)]
        assert all(a > b for a, b in zip(norms, norms[1:]))

    def test_left_side_is_symmetric_positive_definite(self):
        mesh = unit_square_two_triangles()
        state = FlowState.initial(mesh, eps0=0.5, c=2.0, t0=1.0, tau=0.1)
        space = p1_vector_space(mesh)
        M = mass_matrix(space).matrix
        K = stiffness_matrix(space).matrix
        lhs = (
            state.eta() * (M + K) + (state.eps0 / (2.0 * state.tau)) * (M + M)
        ).toarray()
        assert np.abs(lhs - lhs.T).max() <= 1e-14
        assert np.linalg.eigvalsh(lhs).min() > 0.0

    def test_gradient_functional_and_array_agree(self):
        mesh = fixtures.graded_disk()
        state = FlowState.initial(mesh, eps0=1.0, tau=0.02)
        g = smooth_gradient(mesh)
        assert np.array_equal(
            inertial_step(state, GradientFunctional(values=g)),
            inertial_step(state, g),
        )

    def test_wrong_gradient_size_rejected(self):
        mesh = fixtures.graded_disk()
        state = FlowState.initial(mesh)
        with pytest.raises(ValueError):
            inertial_step(state, np.zeros(mesh.n_vertices))

    def test_fixed_mask_pins_velocity(self):
        mesh = fixtures.channel_with_obstacle()
        state = FlowState.initial(mesh, eps0=1.0, tau=0.01)
        g = smooth_gradient(mesh)
        fixed = np.zeros(mesh.n_vertices, dtype=bool)
        fixed[mesh.boundary_vertex_indices()[::2]] = True
        w = inertial_step(state, g, fixed_mask=fixed)
        assert not np.any(w[fixed])
        assert np.any(w[~fixed])


class TestEnergies:
    def test_kinetic_energy_of_unit_translation(self):
        mesh = unit_square_two_triangles()
        state = FlowState.initial(mesh, eps0=2.0, tau=0.02)
        from dataclasses import replace

        w = np.tile([1.0, 0.0], (mesh.n_vertices, 1))
        state = replace(state, w_tilde=w)
        # (eps0 / 2) * integral of |w|^2 = 1 * area = 1 on the unit square.
        assert kinetic_energy(state) == pytest.approx(1.0, rel=1e-12)

    def test_kinetic_energy_zero_without_inertia(self):
        mesh = unit_square_two_triangles()
        state = FlowState.initial(mesh, eps0=0.0)
        from dataclasses import replace

        state = replace(state, w_tilde=np.ones_like(state.w_tilde))
        assert kinetic_energy(state) == 0.0

    def test_mechanical_is_exact_sum(self):
        mesh = fixtures.graded_disk()
        state = FlowState.initial(mesh, eps0=1.3, tau=0.02)
        from dataclasses import replace

        rng = np.random.default_rng(11)
        state = replace(state, w_tilde=rng.standard_normal(state.w_tilde.shape))
        record = mechanical_energy(state, model=None, objective=0.7)
        assert record.objective == 0.7
        assert record.kinetic > 0.0
        assert record.mechanical == record.objective + record.kinetic
        assert record.eta == state.eta()
        assert record.time == state.time


class TestAdvance:
    def test_zero_velocity_keeps_vertices_and_ticks_clock(self):
        mesh = fixtures.graded_disk()
        state = FlowState.initial(mesh, tau=0.02)
        moved = advance(state, np.zeros_like(mesh.vertices))
        assert np.array_equal(moved.mesh.vertices, mesh.vertices)
        assert np.array_equal(moved.mesh.triangles, mesh.triangles)
        assert moved.step == 1
        assert moved.time == pytest.approx(0.02)

    def test_displacement_matches_tau_times_velocity(self):
        mesh = fixtures.graded_disk()
        state = FlowState.initial(mesh, tau=0.05)
        rng = np.random.default_rng(2)
        velocity = 0.01 * rng.standard_normal(mesh.vertices.shape)
        moved = advance(state, velocity)
        assert np.allclose(moved.flow_displacement, state.tau * velocity, atol=1e-15)
        assert np.array_equal(moved.prev_mesh.vertices, mesh.vertices)

    def test_pure_inertial_velocity_dispatch(self):
        mesh = fixtures.graded_disk()
        state = FlowState.initial(mesh, tau=0.02)
        velocity = np.tile([0.1, 0.0], (mesh.n_vertices, 1))
        moved = advance(state, velocity)
        assert np.array_equal(moved.w_tilde, velocity)
        assert np.array_equal(moved.mesh_velocity, velocity)

    def test_extended_velocity_dispatch_keeps_both(self):
        mesh = fixtures.graded_disk()
        state = FlowState.initial(mesh, tau=0.02)
        w_tilde = np.tile([0.1, 0.0], (mesh.n_vertices, 1))
        extended = 0.5 * w_tilde
        moved = advance(state, extended, w_tilde_next=w_tilde)
        assert np.array_equal(moved.w_tilde, w_tilde)
        assert np.array_equal(moved.mesh_velocity, extended)

    def test_two_steps_track_composed_map(self):
        mesh = fixtures.graded_disk()
        state = FlowState.initial(mesh, tau=0.1)
        v1 = np.tile([0.2, 0.0], (mesh.n_vertices, 1))
        v2 = np.tile([0.0, -0.1], (mesh.n_vertices, 1))
        moved = advance(advance(state, v1), v2)
        expected = mesh.vertices + 0.1 * v1 + 0.1 * v2
        assert np.allclose(moved.mesh.vertices, expected, atol=1e-15)
        assert moved.step == 2


class TestStateValidation:
    def test_negative_eps0_rejected(self):
        with pytest.raises(ValueError):
            FlowState.initial(fixtures.graded_disk(), eps0=-1.0)

    def test_nonpositive_tau_rejected(self):
        with pytest.raises(ValueError):
            FlowState.initial(fixtures.graded_disk(), tau=0.0)

    def test_nonpositive_constant_eta_rejected(self):
        with pytest.raises(ValueError):
            FlowState.initial(fixtures.graded_disk(), constant_eta=0.0)

    def test_constant_eta_overrides_schedule(self):
        state = FlowState.initial(fixtures.graded_disk(), constant_eta=0.7)
        assert state.eta() == 0.7

    def test_mismatched_previous_mesh_rejected(self):
        from dataclasses import replace

        state = FlowState.initial(fixtures.graded_disk())
        other = fixtures.lshape(4)
        with pytest.raises(ValueError):
            replace(state, prev_mesh=other)
