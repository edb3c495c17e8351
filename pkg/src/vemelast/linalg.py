"""Symmetric sparse systems, preconditioned conjugate gradients, and
small dense solves.

Assembly is bitwise deterministic: triplets are sorted by (row, col)
before duplicate summation, so the compressed matrix never depends on
element visit order roundoff.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.io
import scipy.sparse as sp

from .errors import ConvergenceError, IndefiniteSystemError, SingularSystemError

MAX_DENSE_SOLVE = 64
MAX_DENSE_EIGEN = 600
CG_ITER_FACTOR = 10  # iteration budget: 10 n


@dataclass
class SparseSystem:
    """Symmetric n x n system; only the lower triangle is stored.

    `lower` holds entries with row >= col in CSR form with no explicit
    zeros; `rhs` is the right-hand side (zeros when not yet loaded).
    """

    n: int
    lower: sp.csr_matrix
    rhs: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.rhs is None:
            self.rhs = np.zeros(self.n)
        r, c = self.lower.nonzero()
        if len(r) and (r.max() >= self.n or c.max() >= self.n):
            raise ValueError("entry outside the declared dimension")
        if np.any(r < c):
            raise ValueError("upper-triangle entry in lower storage")

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.lower @ x
        y += self.lower.T @ x
        y -= self.diagonal() * x
        return y

    def diagonal(self) -> np.ndarray:
        return self.lower.diagonal()

    def to_dense(self) -> np.ndarray:
        A = self.lower.toarray()
        return A + A.T - np.diag(np.diag(A))


def _compress_triplets(n: int, rows, cols, vals):
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=float)
    if len(rows) == 0:
        return sp.csr_matrix((n, n))
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    boundary = np.empty(len(rows), dtype=bool)
    boundary[0] = True
    boundary[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
    starts = np.nonzero(boundary)[0]
    summed = np.add.reduceat(vals, starts)
    r, c = rows[starts], cols[starts]
    keep = summed != 0.0
    return sp.csr_matrix((summed[keep], (r[keep], c[keep])), shape=(n, n))


def assemble_symmetric(n: int, rows, cols, vals, rhs=None) -> SparseSystem:
    """Build a SparseSystem from symmetric triplet data (both triangles
    may be present; only row >= col entries are kept)."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=float)
    if len(rows) and (rows.min() < 0 or cols.min() < 0
                      or rows.max() >= n or cols.max() >= n):
        raise ValueError("triplet index out of range")
    keep = rows >= cols
    lower = _compress_triplets(n, rows[keep], cols[keep], vals[keep])
    system = SparseSystem(n=n, lower=lower)
    if rhs is not None:
        system.rhs = np.asarray(rhs, dtype=float).copy()
    return system


def system_from_csr(A: sp.spmatrix, rhs=None) -> SparseSystem:
    """Wrap a full symmetric scipy sparse matrix as a SparseSystem."""
    A = A.tocsr()
    lower = sp.tril(A, format="csr")
    lower.eliminate_zeros()
    system = SparseSystem(n=A.shape[0], lower=lower)
    if rhs is not None:
        system.rhs = np.asarray(rhs, dtype=float).copy()
    return system


@dataclass(frozen=True)
class CgResult:
    x: np.ndarray
    iterations: int
    relative_residual: float


def cg_solve(system: SparseSystem, rhs=None, tol: float = 1e-10,
             max_iter: int = None) -> CgResult:
    """Jacobi-preconditioned conjugate gradients.

    Raises IndefiniteSystemError when a search direction has
    nonpositive curvature (the matrix is not positive definite, which
    for assembled systems usually means a rigid mode survived boundary
    elimination) and ConvergenceError when the iteration budget
    (default 10 n) is exhausted.
    """
    b = system.rhs if rhs is None else np.asarray(rhs, dtype=float)
    n = system.n
    if max_iter is None:
        max_iter = CG_ITER_FACTOR * n
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return CgResult(np.zeros(n), 0, 0.0)
    diag = system.diagonal()
    if np.any(diag <= 0.0):
        raise IndefiniteSystemError(
            "nonpositive diagonal entry; system is not positive definite"
        )
    x = np.zeros(n)
    r = b.copy()
    z = r / diag
    p = z.copy()
    rz = float(r @ z)
    for it in range(1, max_iter + 1):
        Ap = system.matvec(p)
        pAp = float(p @ Ap)
        if pAp <= 0.0:
            raise IndefiniteSystemError(
                "nonpositive curvature direction encountered; the system "
                "is not positive definite (likely a missing jump penalty "
                "or unconstrained rigid mode)"
            )
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        rnorm = float(np.linalg.norm(r))
        if rnorm <= tol * bnorm:
            return CgResult(x, it, rnorm / bnorm)
        z = r / diag
        rz_next = float(r @ z)
        p = z + (rz_next / rz) * p
        rz = rz_next
    raise ConvergenceError(
        f"conjugate gradients did not converge in {max_iter} iterations "
        f"(relative residual {float(np.linalg.norm(r)) / bnorm:.3e})"
    )


def dense_solve(A, b) -> np.ndarray:
    """Direct solve for small dense systems (n <= 64), with a residual
    check that rejects matrices singular to working precision."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    if n > MAX_DENSE_SOLVE:
        raise ValueError(f"dense_solve limited to n <= {MAX_DENSE_SOLVE}, got {n}")
    try:
        x = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"matrix is singular: {exc}") from exc
    scale = np.linalg.norm(A) * np.linalg.norm(x) + np.linalg.norm(b)
    if np.linalg.norm(A @ x - b) > 1e-12 * scale:
        raise SingularSystemError("matrix is singular to working precision")
    return x


def dense_symmetric_eigen(A):
    """Eigendecomposition of a small symmetric matrix (n <= 600);
    returns eigenvalues ascending and orthonormal eigenvectors."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    if n > MAX_DENSE_EIGEN:
        raise ValueError(f"dense_symmetric_eigen limited to n <= {MAX_DENSE_EIGEN}, got {n}")
    sym_defect = np.abs(A - A.T).max()
    if sym_defect > 1e-10 * max(1.0, np.abs(A).max()):
        raise ValueError("matrix is not symmetric")
    w, V = np.linalg.eigh(0.5 * (A + A.T))
    return w, V


def write_matrix_market(path, system: SparseSystem, comment: str = "") -> None:
    """Dump the system matrix in MatrixMarket coordinate format (and
    the right-hand side alongside as `<path>.rhs.txt` if nonzero)."""
    scipy.io.mmwrite(str(path), system.lower.tocoo(), comment=comment,
                     field="real", symmetry="symmetric")
    if np.any(system.rhs):
        np.savetxt(f"{path}.rhs.txt", system.rhs)
