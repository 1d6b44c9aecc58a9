"""Sparse symmetric linear algebra front ends.

Wraps scipy.sparse behind the small contract the schemes need: triplet
assembly into :class:`SparseSystem`, preconditioned conjugate gradients for
SPD systems, a direct symmetric-indefinite factorization for saddle-point
blocks, and deterministic shift-invert subspace iteration for the smallest
generalized eigenpairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class SolverError(RuntimeError):
    """Linear solve failed: non-convergence, singularity, or bad inputs."""


@dataclass(frozen=True)
class SparseSystem:
    """Symmetric sparse operator in compressed row form.

    ``spd`` distinguishes positive-definite systems (eligible for CG) from
    symmetric-indefinite ones (saddle-point blocks, factorized directly).
    ``n_primal`` marks the primal block size of a saddle system
    [[K, B^T], [B, 0]]; the trailing dim - n_primal rows are constraints.
    """

    matrix: sp.csr_matrix
    spd: bool
    n_primal: int | None = field(default=None)

    def __post_init__(self):
        m = self.matrix
        if m.shape[0] != m.shape[1]:
            raise SolverError(f"system must be square, got {m.shape}")
        scale = max(np.abs(m.data).max(initial=0.0), 1.0)
        asym = abs(m - m.T)
        if asym.nnz and asym.data.max() > 1e-12 * scale:
            raise SolverError("matrix entries are not symmetric to 12 digits")
        if self.spd and m.diagonal().min(initial=np.inf) <= 0.0:
            raise SolverError("SPD-flagged system has non-positive diagonal")

    @classmethod
    def from_triplets(cls, dim, rows, cols, values, *, spd, n_primal=None):
        matrix = sp.coo_matrix(
            (np.asarray(values, dtype=np.float64), (rows, cols)), shape=(dim, dim)
        ).tocsr()
        matrix.sum_duplicates()
        return cls(matrix, spd=spd, n_primal=n_primal)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x

    def dump_coo(self, path: str) -> None:
        """Write the matrix as 'row col value' lines for external inspection."""
        coo = self.matrix.tocoo()
        with open(path, "w") as handle:
            for r, c, v in zip(coo.row, coo.col, coo.data):
                handle.write(f"{r} {c} {v:.17g}\n")


def solve_spd(
    system: SparseSystem,
    b: np.ndarray,
    tol: float = 1e-10,
    maxiter: int | None = None,
) -> np.ndarray:
    """Conjugate gradients with an incomplete-LU preconditioner.

    Guarantees a relative residual ||Ax - b|| / ||b|| below ``tol`` or
    raises :class:`SolverError` carrying the final residual.  The iteration
    cap defaults to ten times the dimension.
    """
    if not system.spd:
        raise SolverError("solve_spd requires an SPD-flagged system")
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (system.dim,):
        raise SolverError(f"right side has shape {b.shape}, expected ({system.dim},)")
    norm_b = np.linalg.norm(b)
    if norm_b == 0.0:
        return np.zeros_like(b)
    if maxiter is None:
        maxiter = 10 * system.dim
    a_csc = system.matrix.tocsc()
    try:
        ilu = spla.spilu(a_csc, drop_tol=1e-5, fill_factor=15)
        preconditioner = spla.LinearOperator(a_csc.shape, ilu.solve)
    except RuntimeError:
        preconditioner = None
    x, info = spla.cg(
        system.matrix, b, rtol=tol, atol=0.0, maxiter=maxiter, M=preconditioner
    )
    residual = np.linalg.norm(system.matrix @ x - b) / norm_b
    if info != 0 or residual > tol:
        raise SolverError(
            f"CG did not reach tol={tol:g} within {maxiter} iterations "
            f"(final relative residual {residual:.3e})"
        )
    return x


def solve_saddle(
    system: SparseSystem,
    rhs: np.ndarray,
    tol: float = 1e-10,
) -> tuple[np.ndarray, np.ndarray]:
    """Direct factorization of a saddle system [[K, B^T], [B, 0]].

    Returns (primal, multiplier) split at ``system.n_primal``.  The block
    residual of both the primal and constraint rows must meet ``tol``
    relative to the right side, otherwise the constraint block is reported
    as rank deficient.
    """
    if system.n_primal is None:
        raise SolverError("solve_saddle requires a system with n_primal set")
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.shape != (system.dim,):
        raise SolverError(f"right side has shape {rhs.shape}, expected ({system.dim},)")
    try:
        lu = spla.splu(system.matrix.tocsc())
        x = lu.solve(rhs)
    except RuntimeError as exc:
        raise SolverError(f"saddle factorization failed: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SolverError("saddle solve produced non-finite values (singular block)")
    n = system.n_primal
    residual = system.matrix @ x - rhs
    scale = max(np.linalg.norm(rhs), 1.0)
    primal_res = np.linalg.norm(residual[:n]) / scale
    constraint_res = np.linalg.norm(residual[n:]) / scale
    if constraint_res > tol:
        raise SolverError(
            f"constraint block rank deficient or inconsistent "
            f"(constraint residual {constraint_res:.3e} > {tol:g})"
        )
    if primal_res > tol:
        raise SolverError(f"primal residual {primal_res:.3e} exceeds {tol:g}")
    return x[:n], x[n:]


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Resolve the eigenvector sign ambiguity deterministically."""
    fixed = vectors.copy()
    for k in range(fixed.shape[1]):
        i = int(np.argmax(np.abs(fixed[:, k])))
        if fixed[i, k] < 0:
            fixed[:, k] = -fixed[:, k]
    return fixed


def generalized_eigs(
    K: SparseSystem,
    M: SparseSystem,
    count: int,
    tol: float = 1e-8,
    max_sweeps: int = 1000,
    initial: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Smallest ``count`` eigenpairs of K x = lambda M x.

    Shift-invert subspace iteration at shift zero with Rayleigh-Ritz
    extraction; deterministic (fixed-seed start unless ``initial`` resumes
    from earlier eigenvectors).  Returns ascending eigenvalues and
    M-orthonormal eigenvectors as columns.
    """
    n = K.dim
    if count < 1 or count > n:
        raise SolverError(f"requested {count} eigenpairs of a {n}-dim system")
    if M.dim != n:
        raise SolverError("K and M dimensions differ")
    m = min(n, count + 4)
    rng = np.random.default_rng(0)
    X = rng.standard_normal((n, m))
    if initial is not None:
        k = min(initial.shape[1], m)
        X[:, :k] = initial[:, :k]
    lu = spla.splu(K.matrix.tocsc())
    M_csr = M.matrix
    K_csr = K.matrix
    values = np.zeros(count)
    for _ in range(max_sweeps):
        Y = lu.solve(M_csr @ X)
        # Rayleigh-Ritz on the subspace spanned by Y.
        A_r = Y.T @ (K_csr @ Y)
        B_r = Y.T @ (M_csr @ Y)
        A_r = 0.5 * (A_r + A_r.T)
        B_r = 0.5 * (B_r + B_r.T)
        ritz_values, ritz_vectors = scipy.linalg.eigh(A_r, B_r)
        X = Y @ ritz_vectors
        values = ritz_values[:count]
        residuals = np.array(
            [
                np.linalg.norm(K_csr @ X[:, k] - values[k] * (M_csr @ X[:, k]))
                / np.linalg.norm(X[:, k])
                for k in range(count)
            ]
        )
        if np.all(residuals <= tol):
            return values.copy(), _fix_signs(X[:, :count])
    raise SolverError(
        f"subspace iteration did not converge in {max_sweeps} sweeps "
        f"(max residual {residuals.max():.3e})"
    )
