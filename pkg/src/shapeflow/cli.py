"""Experiment driver: run configs, the optimization time loop, and artifacts.

A run executes, per step: state solve, inertial velocity solve, optional
boundary regularization, optional bulk extension, mesh update.  Each run
writes ``history.csv`` (one row per recorded step), OFF mesh snapshots,
and a plain-text manifest echoing the fully resolved configuration.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from shapeflow import bgn, fixtures, models, willmore
from shapeflow.bgn import BgnError, BoundaryState
from shapeflow.fem import FemError, element_geometry_surface, mass_matrix, surface_scalar_space
from shapeflow.inertial_flow import FlowState, advance, inertial_step, mechanical_energy
from shapeflow.linalg import SolverError
from shapeflow.mdr import harmonic_extension, solve_mdr
from shapeflow.mesh import (
    MeshError,
    SimplicialMesh2D,
    enclosed_measure,
    quality_report,
    read_mesh,
    write_mesh,
)
from shapeflow.models import volume_project_field


class ConfigError(ValueError):
    """Invalid run configuration; reported before any compute starts."""


MODELS = ("reconstruct", "drag", "eigen", "holefill")
FLOWS = ("h1", "inertial", "inertial-mdr", "inertial-bgn-mdr")
EXTENSIONS = ("mdr", "harmonic")

RECON_PRESETS = {
    "recon-case1": models.recon_case1,
    "recon-case2": models.recon_case2,
}

BULK_FIXTURES = {
    "disk_case1": fixtures.disk_case1,
    "graded_disk": fixtures.graded_disk,
    "polar_disk": fixtures.polar_disk,
    "eigen_ellipse": fixtures.ellipse_disk,
    "unit_square": lambda: fixtures.crisscross_square(16),
    "lshape": fixtures.lshape,
    "channel": fixtures.channel_with_obstacle,
    "open_channel": fixtures.open_channel,
}

PATCH_FIXTURES = {
    "flat_disk": fixtures.flat_disk_patch,
    "tilt_disk": fixtures.tilt_disk_patch,
    "spherical_cap": fixtures.spherical_cap_patch,
    "hemisphere_hole": fixtures.hemisphere_hole_patch,
    "saddle_hole": fixtures.saddle_hole_patch,
}

DEFAULT_MESH = {
    "reconstruct": "disk_case1",
    "drag": "channel",
    "eigen": "unit_square",
    "holefill": "hemisphere_hole",
}

BULK_HEADER = (
    "step", "time", "J", "mech_energy", "eta",
    "volume", "min_angle", "edge_length_ratio",
)
HOLEFILL_HEADER = (
    "step", "time", "willmore_energy", "mech_energy", "conormal_misfit_deg",
    "volume", "min_angle", "edge_length_ratio",
)

# J changes below stop_tol (relative) for this many consecutive steps end
# the run early.
STOP_WINDOW = 10


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved settings of one run."""

    model: str = "reconstruct"
    flow: str = "inertial"
    mesh: str = ""
    tau: float = 0.02
    T: float = 8.0
    eps0: float = 1.0
    c: float = 1.0
    t0: float = 1.0
    gap_tol: float = 1e-2
    stop_tol: float = 1e-10
    snapshot_every: int = 50
    u_d: str = "recon-case1"
    viscosity: float = 1.0
    ell: int = 1
    mu_out: str = "fixture"
    extension: str = "mdr"
    label: str = ""
    out: str = "runs/latest"

    def validate(self) -> "RunConfig":
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; choose from {MODELS}")
        if self.flow not in FLOWS:
            raise ConfigError(f"unknown flow {self.flow!r}; choose from {FLOWS}")
        if self.extension not in EXTENSIONS:
            raise ConfigError(
                f"unknown extension {self.extension!r}; choose from {EXTENSIONS}"
            )
        if self.tau <= 0:
            raise ConfigError("tau must be positive")
        if self.T < self.tau:
            raise ConfigError("final time T must be at least one step tau")
        if self.eps0 < 0:
            raise ConfigError("eps0 must be nonnegative")
        if self.c <= 0 or self.t0 <= 0:
            raise ConfigError("damping constants c and t0 must be positive")
        if self.stop_tol < 0 or self.gap_tol < 0:
            raise ConfigError("tolerances must be nonnegative")
        if self.snapshot_every < 1:
            raise ConfigError("snapshot_every must be a positive step count")
        if self.ell < 1:
            raise ConfigError("eigenvalue index ell is 1-based")
        if self.viscosity <= 0:
            raise ConfigError("viscosity must be positive")
        if self.model == "holefill":
            if self.flow != "inertial-mdr":
                raise ConfigError(
                    "holefill pairs only with the inertial-mdr surface pipeline"
                )
            if self.mu_out != "fixture":
                raise ConfigError(
                    "mu_out mode 'fixture' is the only supported conormal source"
                )
            if self.resolved_mesh() not in PATCH_FIXTURES:
                raise ConfigError(
                    "holefill needs a named patch fixture: "
                    + ", ".join(sorted(PATCH_FIXTURES))
                )
        elif self.model == "reconstruct" and self.u_d not in RECON_PRESETS:
            raise ConfigError(
                f"unknown u_d preset {self.u_d!r}; choose from "
                + ", ".join(sorted(RECON_PRESETS))
            )
        return self

    def resolved_mesh(self) -> str:
        return self.mesh if self.mesh else DEFAULT_MESH[self.model]

    def resolved_label(self) -> str:
        if self.label:
            return self.label
        return f"{self.model}/{self.flow}(eps0={self.eps0:g})"


def _field_types() -> dict[str, type]:
    return {f.name: f.type for f in fields(RunConfig)}


_COERCE = {"float": float, "int": int, "str": str}


def _coerce(key: str, raw: str):
    types = _field_types()
    if key not in types:
        raise ConfigError(f"unknown config key {key!r}")
    type_name = types[key] if isinstance(types[key], str) else types[key].__name__
    try:
        return _COERCE[type_name](raw)
    except ValueError as exc:
        raise ConfigError(f"config key {key} = {raw!r}: {exc}") from exc


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse flat ``key = value`` lines; '#' starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in body.split("=", 1))
        values[key] = _coerce(key, raw)
    return values


def load_config(path: str | None, overrides: dict | None = None) -> RunConfig:
    values = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {path}")
        values.update(parse_config_text(p.read_text(), source=str(path)))
    for key, raw in (overrides or {}).items():
        if raw is not None:
            values[key] = _coerce(key, str(raw))
    return RunConfig(**values).validate()


def resolve_bulk_mesh(cfg: RunConfig) -> SimplicialMesh2D:
    name = cfg.resolved_mesh()
    if name in BULK_FIXTURES:
        return BULK_FIXTURES[name]()
    path = Path(name)
    if not path.is_file():
        raise ConfigError(
            f"mesh {name!r} is neither a named fixture nor an existing file"
        )
    mesh = read_mesh(str(path))
    if not isinstance(mesh, SimplicialMesh2D):
        raise ConfigError(f"mesh file {name!r} is a surface, not a planar mesh")
    return mesh


def build_model(cfg: RunConfig):
    if cfg.model == "reconstruct":
        return RECON_PRESETS[cfg.u_d]()
    if cfg.model == "drag":
        return models.StokesDragModel(viscosity=cfg.viscosity)
    if cfg.model == "eigen":
        return models.EigenvalueModel(ell=cfg.ell, gap_tol=cfg.gap_tol)
    raise ConfigError(f"model {cfg.model!r} has no bulk pipeline")


def _format_row(row) -> list:
    out = []
    for value in row:
        if isinstance(value, (int, np.integer)):
            out.append(str(int(value)))
        else:
            out.append(repr(float(value)))
    return out


def _write_history(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(_format_row(row))


def _write_manifest(path: Path, cfg: RunConfig, summary: dict) -> None:
    lines = []
    for f in fields(RunConfig):
        value = getattr(cfg, f.name)
        if f.name == "mesh":
            value = cfg.resolved_mesh()
        if f.name == "label":
            value = cfg.resolved_label()
        lines.append(f"{f.name}: {value}")
    for key, value in summary.items():
        lines.append(f"{key}: {value}")
    path.write_text("\n".join(lines) + "\n")


def _shortest_edge(mesh) -> float:
    t = mesh.triangles
    v = mesh.vertices
    lengths = [
        np.linalg.norm(v[t[:, i]] - v[t[:, j]], axis=1)
        for i, j in ((0, 1), (1, 2), (2, 0))
    ]
    return float(np.minimum.reduce(lengths).min())


def _trust_scale(mesh, velocity: np.ndarray, tau: float) -> float:
    """Factor in (0, 1] keeping the largest move at a quarter edge length."""
    speed = float(np.linalg.norm(velocity, axis=1).max())
    if speed <= 0:
        return 1.0
    return min(1.0, 0.25 * _shortest_edge(mesh) / (tau * speed))


def _limit_step(mesh, velocity: np.ndarray, tau: float) -> np.ndarray:
    """Trust-region safeguard on the mesh motion.

    Boundary regularization responds to curvature spikes (sharp corners)
    with velocities far beyond what the bulk mesh can follow in one step.
    Rescaling the whole field, rather than clipping vertices, preserves
    the motion pattern and merely slows the clock while the spike rounds
    off; the factor is 1 whenever no vertex would move further than a
    quarter of the shortest edge.
    """
    scale = _trust_scale(mesh, velocity, tau)
    if scale >= 1.0:
        return velocity
    return scale * velocity


class _Snapshots:
    """OFF snapshot writer keeping track of which steps exist already."""

    def __init__(self, out_dir: Path, every: int):
        self.out_dir = out_dir
        self.every = every
        self.written: set[int] = set()

    def due(self, step: int) -> bool:
        return step % self.every == 0

    def write(self, mesh, step: int) -> None:
        if step in self.written:
            return
        write_mesh(mesh, str(self.out_dir / f"mesh_{step:06d}.off"))
        self.written.add(step)


def _bgn_boundary(cfg: RunConfig, mesh: SimplicialMesh2D) -> BoundaryState:
    marker = fixtures.MARKER_OBSTACLE if cfg.model == "drag" else None
    return BoundaryState.from_mesh(mesh, marker=marker)


def _mesh_velocity(
    cfg: RunConfig,
    model,
    mesh: SimplicialMesh2D,
    w_tilde: np.ndarray,
    free: np.ndarray,
    target_flux: float,
) -> np.ndarray:
    """Turn the inertial velocity into the mesh velocity per flow variant."""
    if cfg.flow in ("h1", "inertial"):
        velocity = w_tilde
        if model.conserves_volume:
            velocity = volume_project_field(
                mesh, velocity, free=free, target_flux=target_flux
            )
        return velocity

    boundary_field = np.zeros_like(w_tilde)
    boundary = mesh.boundary_vertex_indices()
    boundary_field[boundary] = w_tilde[boundary]
    if cfg.flow == "inertial-bgn-mdr":
        loop = _bgn_boundary(cfg, mesh)
        w_trace = w_tilde[loop.node_map]
        alpha = bgn.adaptive_alpha(loop.points, loop.segments, w_trace)
        if alpha > 0:
            w_hat, _ = bgn.bgn_regularize(
                loop.points, loop.segments, w_trace, alpha, cfg.tau
            )
            boundary_field[loop.node_map] = w_hat
    if model.conserves_volume:
        boundary_field = volume_project_field(
            mesh, boundary_field, free=free, target_flux=target_flux
        )
    if cfg.extension == "harmonic":
        velocity = harmonic_extension(mesh, boundary_field)
    else:
        velocity = solve_mdr(mesh, boundary_field).velocity
    return velocity


def _run_bulk(cfg: RunConfig, out_dir: Path) -> dict:
    mesh = resolve_bulk_mesh(cfg)
    model = build_model(cfg)
    state = FlowState.initial(
        mesh,
        eps0=0.0 if cfg.flow == "h1" else cfg.eps0,
        c=cfg.c,
        t0=cfg.t0,
        tau=cfg.tau,
        constant_eta=1.0 if cfg.flow == "h1" else None,
    )
    n_steps = int(round(cfg.T / cfg.tau))
    snaps = _Snapshots(out_dir, cfg.snapshot_every)
    volume_start = enclosed_measure(mesh)
    rows = []
    still = 0
    prev_J = None
    early = False

    def record_state():
        solution = model.solve(state.mesh)
        J = model.objective(state.mesh, solution)
        energy = mechanical_energy(state, model, objective=J)
        quality = quality_report(state.mesh)
        rows.append(
            (
                state.step,
                state.time,
                J,
                energy.mechanical,
                energy.eta,
                enclosed_measure(state.mesh),
                quality.min_angle,
                quality.edge_length_ratio,
            )
        )
        if snaps.due(state.step):
            snaps.write(state.mesh, state.step)
        return J, solution

    for _ in range(n_steps):
        J, solution = record_state()
        if prev_J is not None and abs(J - prev_J) / max(abs(prev_J), 1e-16) < cfg.stop_tol:
            still += 1
        else:
            still = 0
        prev_J = J
        if still >= STOP_WINDOW:
            early = True
            break
        gradient = model.gradient(state.mesh, solution)
        free = model.free_vertex_mask(state.mesh)
        fixed = None if free.all() else ~free
        w_tilde = inertial_step(state, gradient, fixed_mask=fixed)
        target_flux = 0.0
        if model.conserves_volume:
            # Project the descent direction itself so the momentum term
            # never accumulates the volume-changing mode, and aim the mesh
            # velocity's weak flux at the accumulated deficit to pay back
            # the quadratic-in-displacement volume error of earlier steps.
            w_tilde = volume_project_field(state.mesh, w_tilde, free=free)
            target_flux = (volume_start - enclosed_measure(state.mesh)) / cfg.tau
        velocity = _mesh_velocity(cfg, model, state.mesh, w_tilde, free, target_flux)
        if cfg.flow not in ("h1", "inertial"):
            # The carried momentum must match the realized motion: keeping
            # the unclamped w_tilde through a clamped step feeds velocity
            # the mesh never executed back into the momentum term, which
            # then grows without bound while the mesh crawls.
            scale = _trust_scale(state.mesh, velocity, cfg.tau)
            if scale < 1.0:
                velocity = scale * velocity
                w_tilde = scale * w_tilde
        state = advance(state, velocity, w_tilde_next=w_tilde)

    if not early:
        record_state()
    snaps.write(state.mesh, state.step)
    _write_history(out_dir / "history.csv", BULK_HEADER, rows)
    return {
        "steps_completed": state.step,
        "early_stop": early,
        "terminal_J": repr(float(rows[-1][2])),
        "terminal_min_angle": repr(float(rows[-1][6])),
        "n_vertices": mesh.n_vertices,
        "n_triangles": mesh.n_triangles,
    }


def _patch_kinetic(patch: willmore.SurfacePatch) -> float:
    if patch.eps0 == 0:
        return 0.0
    M = mass_matrix(surface_scalar_space(patch.mesh)).matrix
    return 0.5 * patch.eps0 * float(
        sum(patch.w[:, c] @ (M @ patch.w[:, c]) for c in range(3))
    )


def _run_holefill(cfg: RunConfig, out_dir: Path) -> dict:
    mesh, mu_out = PATCH_FIXTURES[cfg.resolved_mesh()]()
    patch = willmore.SurfacePatch.create(mesh, mu_out, eps0=cfg.eps0, tau=cfg.tau)
    n_steps = int(round(cfg.T / cfg.tau))
    snaps = _Snapshots(out_dir, cfg.snapshot_every)
    rows = []
    still = 0
    prev_E = None
    early = False

    def record_state() -> float:
        rec = willmore.record(patch)
        rows.append(
            (
                patch.step,
                patch.time,
                rec.energy,
                rec.energy + _patch_kinetic(patch),
                rec.conormal_misfit_deg,
                float(element_geometry_surface(patch.mesh)[1].sum()),
                rec.quality.min_angle,
                rec.quality.edge_length_ratio,
            )
        )
        if snaps.due(patch.step):
            snaps.write(patch.mesh, patch.step)
        return rec.energy

    for _ in range(n_steps):
        energy = record_state()
        if prev_E is not None and abs(energy - prev_E) / max(abs(prev_E), 1e-16) < cfg.stop_tol:
            still += 1
        else:
            still = 0
        prev_E = energy
        if still >= STOP_WINDOW:
            early = True
            break
        patch = willmore.willmore_step(patch)

    if not early:
        record_state()
    snaps.write(patch.mesh, patch.step)
    _write_history(out_dir / "history.csv", HOLEFILL_HEADER, rows)
    return {
        "steps_completed": patch.step,
        "early_stop": early,
        "terminal_willmore_energy": repr(float(rows[-1][2])),
        "terminal_conormal_misfit_deg": repr(float(rows[-1][4])),
        "n_vertices": mesh.n_vertices,
        "n_triangles": mesh.n_triangles,
    }


def run(cfg: RunConfig) -> Path:
    """Execute one configured run; returns the output directory."""
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if cfg.model == "holefill":
        summary = _run_holefill(cfg, out_dir)
    else:
        summary = _run_bulk(cfg, out_dir)
    _write_manifest(out_dir / "manifest.txt", cfg, summary)
    return out_dir


def _read_history(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


def read_history(path) -> tuple[list[str], list[list[float]]]:
    """Load a history.csv written by :func:`run` as header plus float rows."""
    header, raw = _read_history(Path(path))
    return header, [[float(x) for x in row] for row in raw]


def compare(cfg_a: RunConfig, cfg_b: RunConfig, out: str) -> Path:
    """Run two configs and merge their histories on the step index."""
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    dir_a = run(replace(cfg_a, out=str(out_dir / "a")))
    dir_b = run(replace(cfg_b, out=str(out_dir / "b")))
    header_a, rows_a = _read_history(dir_a / "history.csv")
    header_b, rows_b = _read_history(dir_b / "history.csv")

    by_step_a = {int(r[0]): r for r in rows_a}
    by_step_b = {int(r[0]): r for r in rows_b}
    steps = sorted(set(by_step_a) | set(by_step_b))
    merged_header = (
        ["step"]
        + [f"{name}_a" for name in header_a[1:]]
        + [f"{name}_b" for name in header_b[1:]]
    )
    blank_a = [""] * (len(header_a) - 1)
    blank_b = [""] * (len(header_b) - 1)
    with open(out_dir / "comparison.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(merged_header)
        for step in steps:
            part_a = by_step_a.get(step)
            part_b = by_step_b.get(step)
            writer.writerow(
                [step]
                + (part_a[1:] if part_a else blank_a)
                + (part_b[1:] if part_b else blank_b)
            )

    objective = header_a[2]
    final_a = float(rows_a[-1][2])
    final_b = float(rows_b[-1][2])
    ratio = final_a / final_b if final_b != 0 else float("inf")
    summary = "\n".join(
        [
            f"run_a: {dir_a}",
            f"run_b: {dir_b}",
            f"final_{objective}_a: {final_a!r}",
            f"final_{objective}_b: {final_b!r}",
            f"final_{objective}_ratio: {ratio!r}",
            f"terminal_min_angle_a: {float(rows_a[-1][6])!r}",
            f"terminal_min_angle_b: {float(rows_b[-1][6])!r}",
        ]
    )
    (out_dir / "compare.txt").write_text(summary + "\n")
    print(summary)
    return out_dir


def _check_suite() -> list[tuple[str, bool, str]]:
    """Fast derivative and analytic oracles; returns (name, ok, detail)."""
    results = []

    def add(name: str, ok: bool, detail: str) -> None:
        results.append((name, bool(ok), detail))

    def smooth_directions(mesh) -> list[np.ndarray]:
        x, y = mesh.vertices[:, 0], mesh.vertices[:, 1]
        v1 = np.stack([np.sin(x) * np.cos(y), x * y], axis=1)
        v2 = np.stack([x * x, np.cos(y)], axis=1)
        return [v1, v2]

    disk = fixtures.graded_disk(ring_counts=(6, 13, 19, 26, 32))
    for i, direction in enumerate(smooth_directions(disk), start=1):
        slope = models.fd_check(models.recon_case1(), disk, direction)["slope"]
        add(f"fd reconstruct dir{i}", 0.8 <= slope <= 1.2, f"slope {slope:.3f}")

    ellipse = fixtures.ellipse_disk(ring_counts=(6, 13, 19, 26, 32))
    eig_model = models.EigenvalueModel(ell=1)
    for i, direction in enumerate(smooth_directions(ellipse), start=1):
        slope = models.fd_check(eig_model, ellipse, direction)["slope"]
        add(f"fd eigen dir{i}", 0.8 <= slope <= 1.2, f"slope {slope:.3f}")

    channel = fixtures.channel_with_obstacle()
    drag_model = models.drag_case1()
    x, y = channel.vertices[:, 0], channel.vertices[:, 1]
    bump = np.exp(-8.0 * (x**2 + y**2))
    direction = np.stack([bump * x, bump * y], axis=1)
    free = drag_model.free_vertex_mask(channel)
    direction[~free] = 0.0
    slope = models.fd_check(drag_model, channel, direction)["slope"]
    add("fd drag obstacle bump", 0.8 <= slope <= 1.2, f"slope {slope:.3f}")

    open_channel = fixtures.open_channel()
    drag_state = drag_model.solve(open_channel)
    J = drag_model.objective(open_channel, drag_state)
    target = 2.0 * drag_model.viscosity / 3.0
    rel = abs(J - target) / target
    add("poiseuille dissipation", rel <= 0.02, f"J {J:.5f} vs {target:.5f}")

    square = fixtures.structured_square(12)
    eig_state = eig_model.solve(square)
    lam = eig_state["values"][0]
    target = 2.0 * np.pi**2
    rel = abs(lam - target) / target
    add("square eigenvalue", rel <= 0.02, f"lambda1 {lam:.4f} vs {target:.4f}")

    lmesh = fixtures.lshape(k=8)
    shift = np.tile([0.25, -0.5], (lmesh.n_vertices, 1))
    sol = solve_mdr(lmesh, shift)
    add("mdr rigid energy", sol.energy <= 1e-10, f"E {sol.energy:.2e}")

    circle = fixtures.circle_polygon(64)
    loop = BoundaryState.from_polygon(circle)
    theta = np.arctan2(circle[:, 1], circle[:, 0])
    tangential = np.stack([-np.sin(theta), np.cos(theta)], axis=1)
    w_hat, _ = bgn.bgn_regularize(loop.points, loop.segments, tangential, 1.0, 0.01)
    normals = circle / np.linalg.norm(circle, axis=1, keepdims=True)
    normal_speed = np.abs(np.einsum("ij,ij->i", w_hat, normals)).max()
    add("bgn circle tangential", normal_speed <= 1e-8, f"max w.n {normal_speed:.2e}")

    mesh, mu_out = fixtures.flat_disk_patch(24, 5)
    patch = willmore.SurfacePatch.create(mesh, mu_out, eps0=0.1, tau=0.01)
    stepped = willmore.willmore_step(patch)
    w_norm = float(np.linalg.norm(stepped.w))
    add("willmore flat stationary", w_norm <= 1e-8, f"|w| {w_norm:.2e}")

    return results


def check() -> int:
    results = _check_suite()
    width = max(len(name) for name, _, _ in results)
    failures = 0
    for name, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        failures += not ok
        print(f"{status}  {name:<{width}}  {detail}")
    print(f"{len(results) - failures}/{len(results)} checks passed")
    return 0 if failures == 0 else 3


def _add_override_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", choices=MODELS)
    parser.add_argument("--flow", choices=FLOWS)
    parser.add_argument("--mesh")
    parser.add_argument("--tau")
    parser.add_argument("--T")
    parser.add_argument("--eps0")
    parser.add_argument("--c")
    parser.add_argument("--t0")
    parser.add_argument("--gap-tol", dest="gap_tol")
    parser.add_argument("--stop-tol", dest="stop_tol")
    parser.add_argument("--snapshot-every", dest="snapshot_every")
    parser.add_argument("--u-d", dest="u_d")
    parser.add_argument("--viscosity")
    parser.add_argument("--ell")
    parser.add_argument("--mu-out", dest="mu_out")
    parser.add_argument("--extension", choices=EXTENSIONS)
    parser.add_argument("--label")
    parser.add_argument("--out")


def _overrides_from_args(args: argparse.Namespace) -> dict:
    keys = _field_types().keys()
    return {key: getattr(args, key) for key in keys if getattr(args, key, None) is not None}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shapeflow",
        description="Shape optimization runs with inertial gradient flows",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one configured run")
    p_run.add_argument("--config", help="flat key = value config file")
    _add_override_flags(p_run)

    p_cmp = sub.add_parser("compare", help="run two configs and merge histories")
    p_cmp.add_argument("--a", required=True, help="config file for run A")
    p_cmp.add_argument("--b", required=True, help="config file for run B")
    p_cmp.add_argument("--out", required=True, help="comparison output directory")

    sub.add_parser("check", help="run the derivative and analytic oracle suite")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = load_config(args.config, _overrides_from_args(args))
            out_dir = run(cfg)
            print(f"run complete: {out_dir / 'history.csv'}")
            return 0
        if args.command == "compare":
            cfg_a = load_config(args.a)
            cfg_b = load_config(args.b)
            compare(cfg_a, cfg_b, args.out)
            return 0
        return check()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (MeshError, FemError, BgnError, SolverError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
