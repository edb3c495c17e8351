"""Sparse symmetric storage, conjugate gradients, and dense fallbacks."""
import numpy as np
import pytest
import scipy.io
import scipy.linalg
import scipy.sparse as sp

from vemelast import ConvergenceError, IndefiniteSystemError, SingularSystemError
from vemelast.linalg import (
    CG_ITER_FACTOR,
    MAX_DENSE_EIGEN,
    MAX_DENSE_SOLVE,
    SparseSystem,
    assemble_symmetric,
    cg_solve,
    dense_solve,
    dense_symmetric_eigen,
    system_from_csr,
    write_matrix_market,
)


def random_spd_triplets(n, rng):
    """Triplet data (both triangles, with duplicates) for a random SPD
    matrix, plus the dense reference."""
    M = rng.standard_normal((n, n))
    A = M @ M.T + n * np.eye(n)
    rows, cols, vals = [], [], []
    for i in range(n):
        for j in range(n):
            # split every entry into two contributions to exercise
            # duplicate summation
            rows += [i, i]
            cols += [j, j]
            vals += [0.25 * A[i, j], 0.75 * A[i, j]]
    return rows, cols, vals, A


def test_matvec_matches_dense():
    rng = np.random.default_rng(5)
    rows, cols, vals, A = random_spd_triplets(12, rng)
    system = assemble_symmetric(12, rows, cols, vals)
    x = rng.standard_normal(12)
    assert system.matvec(x) == pytest.approx(A @ x, rel=1e-13)
    assert system.to_dense() == pytest.approx(A, rel=1e-13)
    assert system.diagonal() == pytest.approx(np.diag(A), rel=1e-13)


def test_assembly_is_bitwise_deterministic_under_shuffle():
    rng = np.random.default_rng(11)
    rows, cols, vals, _ = random_spd_triplets(9, rng)
    rows, cols, vals = map(np.asarray, (rows, cols, vals))
    base = assemble_symmetric(9, rows, cols, vals)
    for seed in range(4):
        perm = np.random.default_rng(seed).permutation(len(rows))
        other = assemble_symmetric(9, rows[perm], cols[perm], vals[perm])
        assert np.array_equal(base.lower.data, other.lower.data)
        assert np.array_equal(base.lower.indices, other.lower.indices)
        assert np.array_equal(base.lower.indptr, other.lower.indptr)


def test_assembly_drops_explicit_zeros_and_sums_duplicates():
    system = assemble_symmetric(
        2, [0, 0, 1, 1, 1], [0, 0, 1, 1, 0], [1.5, 2.5, 1.0, -1.0, 0.0])
    assert system.lower.nnz == 1  # (0,0) summed; (1,1) cancels; (1,0) zero
    assert system.to_dense() == pytest.approx(np.array([[4.0, 0.0], [0.0, 0.0]]))


def test_assembly_rejects_out_of_range_indices():
    with pytest.raises(ValueError):
        assemble_symmetric(2, [0, 2], [0, 0], [1.0, 1.0])
    with pytest.raises(ValueError):
        assemble_symmetric(2, [0, -1], [0, 0], [1.0, 1.0])


def test_sparse_system_rejects_upper_triangle_storage():
    upper = sp.csr_matrix(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        SparseSystem(n=2, lower=upper)


def test_cg_identity_converges_in_one_iteration():
    system = system_from_csr(sp.eye(40, format="csr"))
    b = np.arange(1.0, 41.0)
    result = cg_solve(system, b, tol=1e-12)
    assert result.iterations == 1
    assert result.x == pytest.approx(b)
    assert result.relative_residual <= 1e-12


def test_cg_zero_rhs_short_circuits():
    system = system_from_csr(sp.eye(5, format="csr"))
    result = cg_solve(system, np.zeros(5))
    assert result.iterations == 0
    assert np.all(result.x == 0.0)


def test_cg_solves_hilbert_system():
    H = scipy.linalg.hilbert(4)
    x_exact = np.ones(4)
    system = system_from_csr(sp.csr_matrix(H), rhs=H @ x_exact)
    result = cg_solve(system, tol=1e-13)
    assert result.x == pytest.approx(x_exact, abs=1e-8)


def test_cg_matches_dense_solution_on_random_spd():
    rng = np.random.default_rng(17)
    rows, cols, vals, A = random_spd_triplets(30, rng)
    b = rng.standard_normal(30)
    system = assemble_symmetric(30, rows, cols, vals, rhs=b)
    result = cg_solve(system, tol=1e-12)
    assert result.x == pytest.approx(np.linalg.solve(A, b), rel=1e-8)
    assert result.relative_residual <= 1e-12


def test_cg_rejects_nonpositive_diagonal():
    system = system_from_csr(sp.csr_matrix(np.diag([1.0, -1.0])))
    with pytest.raises(IndefiniteSystemError):
        cg_solve(system, np.array([1.0, 1.0]))


def test_cg_detects_indefinite_curvature():
    # positive diagonal but eigenvalues {3, -1}
    A = np.array([[1.0, 2.0], [2.0, 1.0]])
    system = system_from_csr(sp.csr_matrix(A))
    with pytest.raises(IndefiniteSystemError):
        cg_solve(system, np.array([1.0, -1.0]))


def test_cg_iteration_budget_raises():
    H = scipy.linalg.hilbert(4)
    system = system_from_csr(sp.csr_matrix(H), rhs=np.ones(4))
    with pytest.raises(ConvergenceError):
        cg_solve(system, tol=1e-13, max_iter=2)


def test_cg_default_budget_is_ten_n():
    assert CG_ITER_FACTOR == 10
    # an unreachable tolerance exhausts the default budget; the residual
    # of an ill-conditioned system stalls at roundoff level
    H = scipy.linalg.hilbert(30)
    b = np.sin(np.arange(30) + 1.0)
    system = system_from_csr(sp.csr_matrix(H), rhs=b)
    with pytest.raises(ConvergenceError):
        cg_solve(system, tol=1e-300)


def test_dense_solve_and_caps():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((8, 8)) + 8 * np.eye(8)
    b = rng.standard_normal(8)
    assert dense_solve(A, b) == pytest.approx(np.linalg.solve(A, b))
    big = np.eye(MAX_DENSE_SOLVE + 1)
    with pytest.raises(ValueError):
        dense_solve(big, np.zeros(MAX_DENSE_SOLVE + 1))
    with pytest.raises(ValueError):
        dense_solve(np.ones((2, 3)), np.zeros(2))


def test_dense_solve_singular_raises():
    A = np.array([[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(SingularSystemError):
        dense_solve(A, np.array([1.0, 2.0]))


def test_dense_eigen_and_caps():
    A = np.array([[2.0, 1.0], [1.0, 2.0]])
    w, V = dense_symmetric_eigen(A)
    assert w == pytest.approx([1.0, 3.0])
    assert V.T @ V == pytest.approx(np.eye(2), abs=1e-13)
    assert V @ np.diag(w) @ V.T == pytest.approx(A, abs=1e-13)
    with pytest.raises(ValueError):
        dense_symmetric_eigen(np.eye(MAX_DENSE_EIGEN + 1))
    with pytest.raises(ValueError):
        dense_symmetric_eigen(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_matrix_market_round_trip(tmp_path):
    rng = np.random.default_rng(23)
    rows, cols, vals, A = random_spd_triplets(6, rng)
    b = rng.standard_normal(6)
    system = assemble_symmetric(6, rows, cols, vals, rhs=b)
    path = tmp_path / "system.mtx"
    write_matrix_market(path, system, comment="test dump")
    back = scipy.io.mmread(str(path))
    assert back.toarray() == pytest.approx(system.to_dense(), rel=1e-13)
    rhs_back = np.loadtxt(f"{path}.rhs.txt")
    assert rhs_back == pytest.approx(b, rel=1e-13)
