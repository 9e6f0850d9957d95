"""Dense kernels: LU solves, eigen/Schur forms, identity-pencil QZ, cond2.

Factorisations are delegated to LAPACK through numpy/scipy.  The QZ form
of the pencil ``(I, M)`` is built from one complex Schur form, and the
block backward substitution used by the space-time solver is done here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import NonConvergence, Resonance, SingularMatrix

PIVOT_TOL = 1e-14


@dataclass(frozen=True)
class EigenDecomp:
    values: np.ndarray
    vectors: np.ndarray | None
    cond2_E: float = float("nan")


@dataclass(frozen=True)
class QzForm:
    """Unitary ``Q, Z`` and upper-triangular ``S, T`` with ``Q Z = S``, ``Q M Z = T``."""

    Q: np.ndarray
    Z: np.ndarray
    S: np.ndarray
    T: np.ndarray


def _square(A):
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    return A


def lu_factor(A):
    """LU with partial pivoting; raises SingularMatrix on a tiny pivot."""
    A = _square(A)
    lu, piv = sla.lu_factor(A, check_finite=True)
    scale = np.max(np.abs(A)) if A.size else 1.0
    small = np.nonzero(np.abs(np.diag(lu)) <= PIVOT_TOL * scale)[0]
    if small.size:
        raise SingularMatrix(f"zero pivot at index {small[0]}", index=int(small[0]))
    return lu, piv


def lu_solve(A, B):
    """Solve ``A X = B`` by partial-pivoting LU."""
    return sla.lu_solve(lu_factor(A), np.asarray(B))


def eigen(M, want_vectors: bool = True) -> EigenDecomp:
    """Eigenvalues (and unit eigenvectors) in double precision.

    This is the plain balanced Hessenberg-QR path; on the non-normal LDPG
    matrices its accuracy degrades quickly with N, which is the point of
    comparing it against the zero-based values.
    """
    M = _square(M)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    try:
        if want_vectors:
            w, V = np.linalg.eig(M)
        else:
            w, V = np.linalg.eigvals(M), None
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(f"QR iteration failed: {exc}") from exc
    if V is None:
        return EigenDecomp(w, None)
    V = V / np.linalg.norm(V, axis=0)
    return EigenDecomp(w, V, cond2(V))


def schur_complex(M):
    """``(U, T)`` with ``U^H M U = T`` upper triangular, ``U`` unitary."""
    M = _square(M)
    try:
        T, U = sla.schur(np.asarray(M, dtype=complex), output="complex")
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(f"Schur iteration failed: {exc}") from exc
    return U, np.triu(T)


def qz_identity(M) -> QzForm:
    """QZ form of the pencil ``(I, M)``: ``Z = U``, ``Q = U^H``, ``S = I``."""
    U, T = schur_complex(M)
    n = U.shape[0]
    return QzForm(U.conj().T, U, np.eye(n, dtype=complex), T)


def cond2(A) -> float:
    """Spectral condition number ``sigma_max / sigma_min``."""
    A = _square(A)
    s = np.linalg.svd(A, compute_uv=False)
    if s[-1] < 1e-300:
        raise SingularMatrix("matrix is singular to working precision")
    return float(s[0] / s[-1])


def triangular_block_backsub(S, T, A, G, B=None):
    """Solve ``S W B^T - T W A^T = G`` for ``W`` with ``S, T`` upper triangular.

    Row ``j`` of ``W`` comes from ``(S_jj B - T_jj A) w_j = r_j`` with
    ``r_j = g_j - sum_{k>j} (S_jk B - T_jk A) w_k`` (as column vectors),
    taken for ``j = n-1, ..., 0``.  ``B`` defaults to the identity.
    """
    S = np.asarray(S)
    T = np.asarray(T)
    A = np.atleast_2d(np.asarray(A))
    G = np.asarray(G)
    squeeze = G.ndim == 1
    G = G.reshape(G.shape[0], -1)
    n, nx = G.shape
    Bm = np.eye(nx) if B is None else np.atleast_2d(np.asarray(B))
    dtype = np.result_type(S, T, A, G, Bm, complex)
    W = np.zeros((n, nx), dtype=dtype)
    # accumulated S W and T W rows for rows below j
    SW = np.zeros((n, nx), dtype=dtype)
    TW = np.zeros((n, nx), dtype=dtype)
    for j in range(n - 1, -1, -1):
        r = G[j] - (SW[j] @ Bm.T - TW[j] @ A.T)
        K = S[j, j] * Bm - T[j, j] * A
        try:
            w = lu_solve(K, r)
        except SingularMatrix as exc:
            raise Resonance(f"shifted system {j} is singular", index=j) from exc
        W[j] = w
        SW[:j] += np.outer(S[:j, j], w)
        TW[:j] += np.outer(T[:j, j], w)
    return W[:, 0] if squeeze else W
