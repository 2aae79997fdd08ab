import numpy as np
import pytest
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from magneto_spectra.eigensolve import SolverError, dense_pairs, lowest_pairs
from magneto_spectra.strip import StripDisc
from oracles import dirichlet_laplacian_1d


def test_dirichlet_laplacian_closed_form():
    K, M, exact = dirichlet_laplacian_1d(400)
    # |K| ~ 6e5: the attainable relative residual is ~1e-11
    res = lowest_pairs(K, M, 8, 1e-10)
    assert_allclose(res.values, exact[:8], rtol=1e-11)
    assert np.all(res.residuals <= 1e-10)


def test_unattainable_tolerance_reports_failure():
    K, M, _ = dirichlet_laplacian_1d(400)
    with pytest.raises(SolverError):
        lowest_pairs(K, M, 1, 1e-12, max_restarts=20)


def _random_pencil(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    K = A @ A.conj().T / n
    Bm = rng.standard_normal((n, n))
    M = Bm @ Bm.T / n + np.eye(n)
    return K, M


def test_random_hermitian_pencil_matches_lapack():
    K, M = _random_pencil(300, 1)
    ref = sla.eigh(K, M, eigvals_only=True, subset_by_index=[0, 5])
    res = lowest_pairs(sp.csr_matrix(K), sp.csr_matrix(M), 6, 1e-12, sigma=-1.0)
    assert_allclose(res.values, ref, rtol=1e-9, atol=1e-12)


def test_vectors_are_M_orthonormal():
    K, M = _random_pencil(120, 2)
    res = lowest_pairs(sp.csr_matrix(K), sp.csr_matrix(M), 4, 1e-12, sigma=-1.0)
    X = res.vectors
    assert_allclose(X.conj().T @ M @ X, np.eye(4), atol=1e-10)


@pytest.fixture(scope="module")
def small_strip(var_problem):
    # 24 x 16 = 384 unknowns: dense oracle territory
    d = StripDisc(ns=24, nt=16, t0=0.6, grading=1.5, s_grading=0.5, s_star=0.0)
    return var_problem.operator(60.0, disc=d)


def test_dense_oracle_small_strip(small_strip):
    op = small_strip
    assert op.K.shape[0] <= 500
    ref, _ = dense_pairs(op.K, op.M, 4)
    got = lowest_pairs(op.K, op.M, 4, 1e-11, sigma=30.0).values
    assert_allclose(got, ref, rtol=1e-9)


def test_arpack_oracle(var_problem):
    op = var_problem.operator(300.0)
    sigma = 0.9 * 0.59 * 300.0
    ref = np.sort(spla.eigsh(op.K, 3, op.M, sigma=sigma, which="LM", tol=1e-13)[0])
    got = lowest_pairs(op.K, op.M, 3, 1e-11, sigma=sigma).values
    assert_allclose(got, ref, rtol=1e-10)


def test_bitwise_deterministic(small_strip):
    op = small_strip
    a = lowest_pairs(op.K, op.M, 3, 1e-11, sigma=30.0, seed=7)
    b = lowest_pairs(op.K, op.M, 3, 1e-11, sigma=30.0, seed=7)
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(a.vectors, b.vectors)


@given(st.integers(0, 2**31 - 1))
def test_seed_independent_values(seed):
    K, M, exact = dirichlet_laplacian_1d(60)
    res = lowest_pairs(K, M, 2, 1e-12, seed=seed)
    assert_allclose(res.values, exact[:2], rtol=1e-10)


def test_history_and_stats(small_strip):
    op = small_strip
    r = lowest_pairs(op.K, op.M, 1, 1e-10, sigma=30.0)
    assert r.history and r.iterations > 0 and r.factor_nnz > 0
    assert set(r.to_dict()) >= {"values", "residuals", "history"}


def test_shift_at_eigenvalue_is_perturbed():
    K, M, exact = dirichlet_laplacian_1d(50)
    # a shift exactly at an eigenvalue of a diagonal pencil makes the factor singular
    D = sp.diags(np.arange(1.0, 51.0)).tocsr()
    r = lowest_pairs(D, sp.identity(50, format="csr"), 2, 1e-12, sigma=1.0)
    assert_allclose(r.values, [1.0, 2.0], rtol=1e-12)
    assert r.shift_retries >= 1


@pytest.mark.parametrize("kw", [dict(n=0), dict(n=9), dict(tol=1e-14)])
def test_invalid_arguments(kw):
    K, M, _ = dirichlet_laplacian_1d(50)
    with pytest.raises(ValueError):
        lowest_pairs(K, M, **kw)


def test_solver_error_is_runtime_error():
    assert issubclass(SolverError, RuntimeError)


def test_quasimode_start_is_only_an_optimisation(disk, var_field):
    from magneto_spectra import SpectralProblem

    d = StripDisc(ns=64, nt=24, t0=0.5, grading=1.5, s_grading=0.5, s_star=0.0)
    fast = SpectralProblem(disk, var_field).solve(200.0, disc=d)[1]
    plain = SpectralProblem(disk, var_field, use_quasimode_start=False).solve(200.0, disc=d)[1]
    assert_allclose(fast.values[0], plain.values[0], rtol=1e-9)
    assert fast.iterations <= plain.iterations
