import numpy as np
import pytest

from spectime.banded import BandedMatrix, tridiagonal
from spectime.errors import Resonance, SingularMatrix
from spectime.ldpg import mass_matrix_legendre_test
from spectime.linalg import (cond2, eigen, lu_solve, qz_identity, schur_complex,
                             triangular_block_backsub)


def test_lu_identity_and_diagonal():
    B = np.arange(6.0).reshape(3, 2)
    np.testing.assert_array_equal(lu_solve(np.eye(3), B), B)
    np.testing.assert_allclose(lu_solve([[2.0, 0.0], [0.0, 4.0]], [2.0, 4.0]), [1.0, 1.0])


def test_lu_reconstructs(rng):
    A = rng.standard_normal((8, 8))
    X = rng.standard_normal((8, 3))
    np.testing.assert_allclose(lu_solve(A, A @ X), X, atol=1e-11)


def test_lu_singular_reports_index():
    A = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(SingularMatrix) as info:
        lu_solve(A, [1.0, 1.0])
    assert info.value.index == 1


def test_eigen_examples():
    np.testing.assert_allclose(np.sort(eigen(np.diag([1.0, 2.0, 3.0])).values.real), [1, 2, 3])
    ev = np.sort_complex(eigen(np.array([[2 / 3, -2 / 3], [1 / 6, 2 / 15]])).values)
    np.testing.assert_allclose(ev, [0.4 - 0.2j, 0.4 + 0.2j], atol=1e-14)


def test_eigen_charpoly_residual(rng):
    for _ in range(100):
        M = rng.standard_normal((8, 8))
        for lam in eigen(M, want_vectors=False).values:
            assert abs(np.linalg.det(M - lam * np.eye(8))) < 1e-8 * np.linalg.norm(M) ** 8


def test_eigen_vectors_unit_and_residual(rng):
    M = rng.standard_normal((6, 6))
    d = eigen(M)
    np.testing.assert_allclose(np.linalg.norm(d.vectors, axis=0), 1.0)
    assert np.max(np.abs(M @ d.vectors - d.vectors * d.values)) < 1e-12
    assert d.cond2_E >= 1.0


def test_eigen_rejects_nonfinite():
    with pytest.raises(ValueError):
        eigen(np.array([[np.inf, 0.0], [0.0, 1.0]]))


def test_schur_and_qz():
    M = mass_matrix_legendre_test(2).todense()
    U, T = schur_complex(M)
    np.testing.assert_allclose(U.conj().T @ M @ U, T, atol=1e-14)
    qz = qz_identity(M)
    np.testing.assert_array_equal(np.diag(qz.S), np.ones(2))
    np.testing.assert_allclose(np.sort_complex(np.diag(qz.T)),
                               [0.5 - 0.5j / np.sqrt(3), 0.5 + 0.5j / np.sqrt(3)], atol=1e-14)
    np.testing.assert_allclose(qz.Q @ qz.Z, qz.S, atol=1e-14)


def test_qz_of_identity():
    qz = qz_identity(np.eye(3))
    np.testing.assert_allclose(qz.S, np.eye(3))
    np.testing.assert_allclose(qz.T, np.eye(3), atol=1e-15)


def test_cond2():
    assert cond2(np.eye(4)) == pytest.approx(1.0)
    assert cond2(np.diag([10.0, 1.0])) == pytest.approx(10.0)
    from spectime.ldpg import mass_matrix_m1

    assert abs(cond2(np.eye(20) + mass_matrix_m1(20).todense()) - 1.8730) < 5e-3
    with pytest.raises(SingularMatrix):
        cond2(np.zeros((2, 2)))


def test_block_backsub_residual(rng):
    S = np.triu(rng.standard_normal((4, 4))) + 3 * np.eye(4)
    T = np.triu(rng.standard_normal((4, 4)))
    A = rng.standard_normal((3, 3))
    G = rng.standard_normal((4, 3))
    W = triangular_block_backsub(S, T, A, G)
    res = S @ W - T @ W @ A.T - G
    assert np.max(np.abs(res)) < 1e-10 * (1 + np.abs(W).max())


def test_block_backsub_resonance():
    S = np.eye(2)
    T = np.diag([1.0, 2.0])
    with pytest.raises(Resonance) as info:
        triangular_block_backsub(S, T, np.array([[0.5]]), np.ones((2, 1)))
    assert info.value.index == 1


def test_banded_roundtrip():
    B = tridiagonal([1.0, 2.0], [3.0, 4.0, 5.0], [6.0, 7.0])
    D = B.todense()
    assert D[1, 0] == 1.0 and D[0, 1] == 6.0 and D[2, 2] == 5.0
    assert (B @ np.ones(3)).tolist() == [9.0, 12.0, 7.0]
    assert B.to_csv().splitlines()[0].count(",") == 2
    assert isinstance(B, BandedMatrix) and B.lower == 1 and B.upper == 1
    assert (B ** 2).upper == 2
