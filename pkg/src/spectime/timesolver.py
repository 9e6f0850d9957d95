"""LDPG spectral discretisation in time for ``B u' + A u = f``.

On the reference interval (-1, 1) the state is ``u(t) = u0 + sum_k U[k] phi_k(t)``
with the first-order trial basis ``phi_k = (k+1)/sqrt(2) (P_k + P_{k+1})``.
Testing against the dual basis gives the matrix equation

    U B^T + M_t U A^T = F,    F = Fhat - sqrt(2) e_1 u0^T A^T,

with ``Fhat[j] = (f, phi_j^*)``.  It is solved either by diagonalising
``M_t`` (independent shifted spatial solves) or through the QZ form of the
pencil ``(I, M_t)`` followed by block backward substitution.
"""

from __future__ import annotations

import logging
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import sqrt
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .errors import IllConditionedWarning, Resonance
from .gbp import GbpParams, gbp_eval, gbp_zeros
from .ldpg import mass_matrix_m1
from .linalg import cond2, qz_identity, triangular_block_backsub
from .polybasis import legendre_vander, quadrature

log = logging.getLogger(__name__)

SQRT2 = sqrt(2.0)
DIAG_CAP = 15
COND_E_WARN = 1e12


def trial_values(N_t: int, tau) -> np.ndarray:
    """``Phi[i, k] = phi_k(tau_i)`` for the first-order trial basis."""
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    V = legendre_vander(tau, N_t)
    k = np.arange(N_t)
    return (k + 1) / SQRT2 * (V[:, :-1] + V[:, 1:])


def test_values(N_t: int, tau) -> np.ndarray:
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    V = legendre_vander(tau, N_t)
    k = np.arange(N_t)
    return (V[:, :-1] - V[:, 1:]) / (SQRT2 * (k + 1))


@dataclass(frozen=True)
class TimeSystem:
    """Assembled all-at-once system on the reference interval."""

    A: np.ndarray
    u0: np.ndarray
    N_t: int
    M_t: np.ndarray
    F: np.ndarray
    B: np.ndarray | None = None

    @property
    def N_x(self) -> int:
        return self.u0.size

    def Bmat(self) -> np.ndarray:
        return np.eye(self.N_x) if self.B is None else self.B

    def residual(self, U) -> float:
        """``max |U B^T + M_t U A^T - F|``."""
        U = np.asarray(U)
        return float(np.max(np.abs(U @ self.Bmat().T + self.M_t @ U @ self.A.T - self.F)))

    def end_value(self, U) -> np.ndarray:
        """State at ``t = 1``; ``phi_k(1) = sqrt(2) (k+1)``."""
        k = np.arange(self.N_t)
        return self.u0 + SQRT2 * ((k + 1) @ np.asarray(U))


def project_rhs(f: Callable | None, N_t: int, N_x: int) -> np.ndarray:
    """Rows ``(f, phi_j^*)`` by Gauss quadrature with margin 8."""
    if f is None:
        return np.zeros((N_t, N_x))
    rule = quadrature("gauss", N_t + 8)
    vals = np.array([np.broadcast_to(np.asarray(f(t), dtype=float), (N_x,)) for t in rule.nodes])
    Psi = test_values(N_t, rule.nodes)
    return Psi.T @ (rule.weights[:, None] * vals)


def assemble(A, f, u0, N_t: int, B=None) -> TimeSystem:
    """Build the system for ``B u' + A u = f`` on (-1, 1) with ``u(-1) = u0``."""
    if N_t < 1:
        raise ValueError("N_t must be >= 1")
    A = np.atleast_2d(np.asarray(A, dtype=float))
    u0 = np.atleast_1d(np.asarray(u0, dtype=float))
    if A.shape != (u0.size, u0.size):
        raise ValueError("A must be square and match u0")
    M_t = mass_matrix_m1(N_t).todense()
    F = project_rhs(f, N_t, u0.size)
    F[0] -= SQRT2 * (A @ u0)
    Bm = None if B is None else np.asarray(B, dtype=float)
    return TimeSystem(A, u0, N_t, M_t, F, Bm)


def eigenpairs_m1(N_t: int):
    """Eigenvalues ``-z_j`` of ``M_t`` and unit eigenvectors ``b(z_j)``.

    ``z_j`` are the zeros of ``B_{N_t}^(3)``; ``b`` stacks ``B_0 .. B_{N_t-1}``.
    """
    z = gbp_zeros(N_t, 3).zeros
    E = gbp_eval(GbpParams(N_t - 1, 3), z).T
    E = E / np.linalg.norm(E, axis=0)
    return -z, E


def _threads() -> int:
    env = os.environ.get("SPECTRAL_TIME_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def _refined_solve(E, F, steps=2):
    lu = sla.lu_factor(E)
    G = sla.lu_solve(lu, F)
    for _ in range(steps):
        G = G + sla.lu_solve(lu, F - E @ G)
    return G


def _shifted_solve(K, g, j):
    lu, piv = sla.lu_factor(K)
    if np.min(np.abs(np.diag(lu))) <= 1e-14 * np.max(np.abs(K)):
        raise Resonance(f"shifted system {j} is singular", index=j)
    return sla.lu_solve((lu, piv), g)


def solve_diag(sys: TimeSystem, cap: int = DIAG_CAP, threads: int | None = None):
    """Diagonalisation in time; returns ``(U, diagnostics)``."""
    if sys.N_t > cap:
        warnings.warn(f"diagonalisation with N_t={sys.N_t} > {cap} is unreliable",
                      IllConditionedWarning, stacklevel=2)
    lam, E = eigenpairs_m1(sys.N_t)
    cE = cond2(E)
    if cE > COND_E_WARN:
        warnings.warn(f"eigenvector matrix has cond2 = {cE:.3e}", IllConditionedWarning, stacklevel=2)
    G = _refined_solve(E, sys.F.astype(complex))
    Bm = sys.Bmat()
    real = np.isrealobj(sys.A) and np.isrealobj(Bm) and np.isrealobj(sys.F)
    n = sys.N_t
    # gbp_zeros order: upper half-plane, [real], conjugates in the same order
    half = n // 2
    if real:
        # E has conjugate column pairs, so G must have conjugate row pairs;
        # averaging keeps E G = F and makes the shortcut below exact
        up, lo = np.arange(half), np.arange(n - half, n)
        G[up] = 0.5 * (G[up] + np.conj(G[lo]))
        G[lo] = np.conj(G[up])
        if n % 2:
            G[half] = G[half].real
        todo = list(range(half, n))
    else:
        todo = list(range(n))
    W = np.zeros_like(G)

    def work(j):
        return j, _shifted_solve(Bm + lam[j] * sys.A, G[j], j)

    nthreads = _threads() if threads is None else threads
    if nthreads > 1 and len(todo) > 1:
        with ThreadPoolExecutor(max_workers=nthreads) as ex:
            results = list(ex.map(work, todo))
    else:
        results = [work(j) for j in todo]
    for j, w in results:
        W[j] = w
    if real:
        upper = np.arange(half)
        W[upper] = np.conj(W[n - half + upper])
    U = E @ W
    U = U.real if real else U
    return U, {"cond2_E": cE, "residual": sys.residual(U)}


class QzSolver:
    """Factorised QZ solver for ``U B^T + M_t U A^T = F`` with fixed ``A, B``.

    The Schur form of ``M_t`` and the LU factors of the shifted spatial
    matrices ``B + T_jj A`` are computed once, so repeated right-hand sides
    (e.g. inside a Krylov iteration) only cost the backward substitution.
    """

    def __init__(self, M_t, A, B=None):
        self.qz = qz_identity(M_t)
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        n = self.A.shape[0]
        self.B = np.eye(n) if B is None else np.asarray(B, dtype=float)
        self.lus = []
        for j, t in enumerate(np.diag(self.qz.T)):
            K = self.B + t * self.A
            lu, piv = sla.lu_factor(K)
            if np.min(np.abs(np.diag(lu))) <= 1e-14 * np.max(np.abs(K)):
                raise Resonance(f"shifted system {j} is singular", index=j)
            self.lus.append((lu, piv))

    def solve(self, F):
        qz = self.qz
        G = qz.Q @ np.asarray(F)
        n = G.shape[0]
        W = np.zeros(G.shape, dtype=complex)
        # row j: w_j (B + T_jj A)^T = g_j - sum_{k>j} (S_jk w_k B^T + T_jk w_k A^T), S = I
        acc = np.zeros_like(W)
        for j in range(n - 1, -1, -1):
            w = sla.lu_solve(self.lus[j], G[j] - acc[j])
            W[j] = w
            if j:
                wt = self.A @ w
                acc[:j] += np.outer(qz.T[:j, j], wt)
        U = qz.Z @ W
        if np.isrealobj(F):
            U = U.real
        return U


def solve_qz(sys: TimeSystem):
    """QZ path: ``U = Z W`` with ``S W B^T + T W A^T = Q F`` solved backwards."""
    qz = qz_identity(sys.M_t)
    G = qz.Q @ sys.F
    W = triangular_block_backsub(qz.S, qz.T, -sys.A, G, sys.B)
    U = qz.Z @ W
    if np.isrealobj(sys.A) and np.isrealobj(sys.F):
        U = U.real
    return U


def solve(sys: TimeSystem, strategy: str = "qz", **kw):
    if strategy == "qz":
        return solve_qz(sys), {"residual": None}
    if strategy == "diag":
        return solve_diag(sys, **kw)
    raise ValueError(f"unknown strategy {strategy!r}")


@dataclass(frozen=True)
class SlabGrid:
    """``[t0, t0 + T]`` cut into ``L`` equal slabs with ``N_t`` modes each."""

    T: float
    L: int = 1
    N_t: int = 10
    t0: float = 0.0

    def __post_init__(self):
        if self.L < 1 or self.N_t < 1 or not self.T > 0:
            raise ValueError("need T > 0, L >= 1 and N_t >= 1")

    @property
    def h(self) -> float:
        return self.T / self.L

    def edges(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.L + 1)


@dataclass
class SpaceTimeSolution:
    """Per-slab coefficient matrices with evaluators in ``t`` and ``(x, t)``.

    ``space_eval(coeffs, x)`` maps a spatial coefficient vector (or a stack
    of them, last axis) to values at points ``x``; identity by default.
    """

    grid: SlabGrid
    U: list
    u0: list
    space_eval: Callable | None = None
    diagnostics: list = field(default_factory=list)

    def _slab(self, t):
        k = int(np.clip(np.floor((t - self.grid.t0) / self.grid.h), 0, self.grid.L - 1))
        a = self.grid.t0 + k * self.grid.h
        return k, 2.0 * (t - a) / self.grid.h - 1.0

    def state(self, t) -> np.ndarray:
        """Spatial coefficient vector at time ``t``."""
        k, tau = self._slab(float(t))
        Phi = trial_values(self.U[k].shape[0], np.clip(tau, -1.0, 1.0))[0]
        return self.u0[k] + Phi @ self.U[k]

    def final_state(self) -> np.ndarray:
        k = np.arange(self.U[-1].shape[0])
        return self.u0[-1] + SQRT2 * ((k + 1) @ self.U[-1])

    def __call__(self, x, t):
        s = self.state(t)
        return s if self.space_eval is None else self.space_eval(s, x)

    def interface_jumps(self) -> np.ndarray:
        out = []
        for k in range(self.grid.L - 1):
            n = np.arange(self.U[k].shape[0])
            end = self.u0[k] + SQRT2 * ((n + 1) @ self.U[k])
            out.append(np.max(np.abs(end - self.u0[k + 1])))
        return np.array(out)


def march(grid: SlabGrid, A, f, u0, strategy: str = "qz", B=None, space_eval=None,
          **kw) -> SpaceTimeSolution:
    """Solve ``B u' + A u = f(t)`` over the slabs sequentially.

    Each slab is mapped to (-1, 1), which scales ``A`` and ``f`` by ``h/2``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    h = grid.h
    Ah = 0.5 * h * A
    u = np.atleast_1d(np.asarray(u0, dtype=float))
    Us, starts, diags = [], [], []
    for a in grid.edges()[:-1]:
        fh = None
        if f is not None:
            fh = (lambda tau, a=a: 0.5 * h * np.asarray(f(a + 0.5 * h * (tau + 1.0)), dtype=float))
        sys = assemble(Ah, fh, u, grid.N_t, B)
        U, info = solve(sys, strategy, **kw)
        if info.get("residual") is None:
            info = dict(info, residual=sys.residual(U))
        Us.append(U)
        starts.append(u)
        diags.append(info)
        u = sys.end_value(U)
    return SpaceTimeSolution(grid, Us, starts, space_eval, diags)
