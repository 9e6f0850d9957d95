"""Space-time applications: a linear wave-type equation and a KdV-type equation.

Both problems are discretised in space by LDPG on the reference interval
``xi in (-1, 1)`` (``x = x_L + (xi + 1) l / 2``) and in time by the LDPG
scheme of :mod:`spectime.timesolver`, slab by slab in physical time.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import ceil, sqrt
from typing import Callable

import numpy as np
import scipy.sparse.linalg as spla

from .errors import NewtonDivergence, NonConvergence, SpectimeError
from .ldpg import basis_matrix, mass_matrix_m1
from .polybasis import (antiderivative, derivative_coeffs, legendre_vander, legval,
                        norm_sq, project, quadrature)
from .timesolver import (SQRT2, QzSolver, SlabGrid, SpaceTimeSolution, march,
                         test_values, trial_values)

log = logging.getLogger(__name__)


class IncompatibleData(SpectimeError, ValueError):
    """Initial data violate the boundary conditions."""


def _to_ref(domain):
    xl, xr = domain
    ell = xr - xl
    return (lambda xi: xl + 0.5 * ell * (np.asarray(xi) + 1.0)), (lambda x: 2.0 * (np.asarray(x) - xl) / ell - 1.0)


def wave_u0(x):
    """Default initial profile: a shifted sech^2 bump vanishing at x = -50."""
    x = np.asarray(x, dtype=float)
    return 1.0 / np.cosh(sqrt(3.0) * (x + 35.0) / 6.0) ** 2 - 1.0 / np.cosh(5.0 * sqrt(3.0) / 2.0) ** 2


@dataclass(frozen=True)
class WaveProblem:
    """``u_xt + sigma u = 0`` on ``(x_L, x_R) x (0, T]`` with ``u(x_L, t) = 0``."""

    sigma: float = 1.0
    domain: tuple = (-50.0, 50.0)
    T: float = 10.0
    u0: Callable = wave_u0
    N_x: int = 160
    N_t: int = 10
    L: int = 10

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.domain[0] >= self.domain[1] or not self.T > 0:
            raise ValueError("need x_L < x_R and T > 0")
        if min(self.N_x, self.N_t, self.L) < 1:
            raise ValueError("N_x, N_t and L must be >= 1")

    @property
    def length(self) -> float:
        return self.domain[1] - self.domain[0]

    @property
    def sigma_hat(self) -> float:
        """Coefficient after mapping both x and t onto (-1, 1)."""
        return self.sigma * self.length * self.T / 4.0


def wave_spatial_operator(N_x: int, sigma_hat: float) -> np.ndarray:
    """``sigma_hat M_x``: the system is ``u' + sigma_hat M_x u = 0`` in reference variables."""
    return sigma_hat * mass_matrix_m1(N_x).todense()


def first_order_trial_coeffs(leg) -> np.ndarray:
    """Trial coefficients from Legendre coefficients ``c_0 .. c_N`` (bidiagonal solve).

    ``phi_k = (k+1)/sqrt(2) (P_k + P_{k+1})`` gives
    ``v_n = (sqrt(2) c_n - n v_{n-1}) / (n+1)`` for ``n < N``.
    """
    c = np.asarray(leg, dtype=float)
    N = c.size - 1
    v = np.zeros(N)
    prev = 0.0
    for n in range(N):
        prev = (SQRT2 * c[n] - n * prev) / (n + 1)
        v[n] = prev
    return v


def _space_eval_factory(m, N_x, domain):
    C = basis_matrix(m, "trial", N_x)
    _, to_ref = _to_ref(domain)

    def space_eval(coeffs, x):
        leg = C @ np.asarray(coeffs)
        return legval(leg, to_ref(x))

    return space_eval


def wave_initial_coeffs(p: WaveProblem) -> np.ndarray:
    if abs(float(p.u0(p.domain[0]))) > 1e-10:
        raise IncompatibleData("u0(x_L) must vanish")
    to_phys, _ = _to_ref(p.domain)
    leg = project(lambda xi: p.u0(to_phys(xi)), p.N_x).coeffs
    return first_order_trial_coeffs(leg)


def solve_wave(p: WaveProblem, strategy: str = "qz", **kw) -> SpaceTimeSolution:
    """March the wave problem over ``L`` slabs of ``N_t`` modes each."""
    u = wave_initial_coeffs(p)
    # physical time: u_t + sigma (l/2) M_x u = 0 in xi-coefficients
    A = wave_spatial_operator(p.N_x, p.sigma * p.length / 2.0)
    grid = SlabGrid(p.T, p.L, p.N_t)
    return march(grid, A, None, u, strategy, space_eval=_space_eval_factory(1, p.N_x, p.domain), **kw)


# KdV-type model

def soliton(x, t, shift=5.0):
    """Travelling wave of ``U_t + U U_x + U_xxx = 0``."""
    x = np.asarray(x, dtype=float)
    return 1.0 / np.cosh(sqrt(3.0) * (x - t / 3.0 + shift) / 6.0) ** 2


@dataclass(frozen=True)
class KdvProblem:
    """``U_t + alpha U U_x + eps^2 U_xxx + sigma d_x^{-1} U = 0``.

    Boundary conditions ``U(x_L) = U(x_R) = U_x(x_R) = 0``.  ``N_t`` is the
    number of time modes per slab and ``L`` the slab count.  The default
    ``L = 1`` keeps ``N_x * N_t <= 8000`` unknowns per slab at desk scale.
    """

    alpha: float = 1.0
    epsilon: float = 1.0
    sigma: float = 0.0
    domain: tuple = (-50.0, 50.0)
    T: float = 10.0
    U0: Callable = lambda x: soliton(x, 0.0)
    N_x: int = 160
    N_t: int = 40
    L: int = 1
    newton_tol: float = 1e-10
    newton_maxit: int = 30
    gmres_restart: int = 40

    @property
    def length(self) -> float:
        return self.domain[1] - self.domain[0]


@dataclass(frozen=True)
class KdvOperators:
    """Spatial LDPG pieces on the reference interval."""

    N_x: int
    trial: np.ndarray        # Legendre coefficients of trial functions (columns)
    test: np.ndarray         # same for the test functions
    mass: np.ndarray         # (phi_k, psi_j)
    third: np.ndarray        # (phi_k''', psi_j) = I
    nonlocal_: np.ndarray    # (d^{-1} phi_k, psi_j)
    first: np.ndarray        # (phi_k', psi_j)
    nodes: np.ndarray        # Gauss grid for the nonlinear term
    weights: np.ndarray
    phi_at: np.ndarray       # phi_k(nodes)
    dpsi_at: np.ndarray      # psi_j'(nodes)

    def nonlinear(self, U):
        """``(U U_x, psi_j) = -1/2 (U^2, psi_j')`` for grid values ``U`` (last axis)."""
        return -0.5 * (np.asarray(U) ** 2 * self.weights) @ self.dpsi_at


def _pair(a, b):
    """``(sum a_i P_i, sum b_i P_i)`` for coefficient columns."""
    n = min(a.shape[0], b.shape[0])
    return (b[:n] * norm_sq(np.arange(n))[:, None]).T @ a[:n]


def kdv_spatial_operators(N_x: int, nquad: int | None = None) -> KdvOperators:
    """Dual-Petrov-Galerkin operators for the KdV boundary conditions."""
    if N_x < 3:
        raise ValueError("N_x must be >= 3")
    size = N_x + 4
    Ct = basis_matrix("kdv", "trial", N_x, size)
    Cs = basis_matrix("kdv", "test", N_x, size)

    def deriv(C, order=1):
        D = C
        for _ in range(order):
            D = np.column_stack([derivative_coeffs(D[:, k]) for k in range(D.shape[1])])
        return D

    mass = _pair(Ct, Cs)
    third = _pair(deriv(Ct, 3), Cs)
    first = _pair(deriv(Ct, 1), Cs)
    anti = np.column_stack([antiderivative(Ct[:, k]).coeffs for k in range(N_x)])
    nonlocal_ = _pair(anti, Cs)
    nq = 2 * N_x if nquad is None else nquad
    rule = quadrature("gauss", nq)
    V = legendre_vander(rule.nodes, size - 1)
    phi_at = V @ Ct
    dpsi = deriv(Cs, 1)
    dpsi_at = V[:, : dpsi.shape[0]] @ dpsi
    return KdvOperators(N_x, Ct, Cs, mass, third, nonlocal_, first, rule.nodes, rule.weights,
                        phi_at, dpsi_at)


@dataclass
class NewtonReport:
    iterations: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    gmres_iterations: list = field(default_factory=list)


def _kdv_initial_coeffs(ops: KdvOperators, U0, domain) -> np.ndarray:
    to_phys, _ = _to_ref(domain)
    for xb in domain:
        if abs(float(U0(xb))) > 1e-8:
            raise IncompatibleData("U0 must vanish at both endpoints")
    leg = project(lambda xi: U0(to_phys(xi)), ops.N_x + 2).coeffs
    # L2 projection onto the trial space in Legendre coefficients
    w = np.sqrt(norm_sq(np.arange(leg.size)))
    C = ops.trial[: leg.size]
    return np.linalg.lstsq(w[:, None] * C, w * leg, rcond=None)[0]


class _SlabNewton:
    """Nonlinear space-time residual on one slab and its Jacobian action."""

    def __init__(self, ops, A, nl_coef, N_t):
        self.ops = ops
        self.A = A
        self.B = ops.mass
        self.c = nl_coef
        self.N_t = N_t
        self.M_t = mass_matrix_m1(N_t).todense()
        rule = quadrature("gauss", int(ceil(1.5 * N_t)) + 1)
        self.wt = rule.weights
        self.Phi_t = trial_values(N_t, rule.nodes)
        self.Psi_t = test_values(N_t, rule.nodes)
        self.pre = QzSolver(self.M_t, A, self.B)

    def grid_values(self, u0, U):
        # (n_tau, n_x) values of the state on the space-time Gauss grid
        return (u0 + self.Phi_t @ U) @ self.ops.phi_at.T

    def residual(self, u0, U):
        R = U @ self.B.T + self.M_t @ U @ self.A.T
        R[0] += SQRT2 * (self.A @ u0)
        if self.c:
            N = self.ops.nonlinear(self.grid_values(u0, U))
            R += self.c * (self.Psi_t.T @ (self.wt[:, None] * N))
        return R

    def jac(self, u0, U):
        Ug = self.grid_values(u0, U) if self.c else None
        shape = U.shape

        def mv(v):
            V = v.reshape(shape)
            out = V @ self.B.T + self.M_t @ V @ self.A.T
            if self.c:
                Vg = (self.Phi_t @ V) @ self.ops.phi_at.T
                dN = -((Ug * Vg) * self.ops.weights) @ self.ops.dpsi_at
                out = out + self.c * (self.Psi_t.T @ (self.wt[:, None] * dN))
            return out.ravel()

        return spla.LinearOperator((U.size, U.size), matvec=mv, dtype=float)

    def precond(self, shape):
        return spla.LinearOperator((np.prod(shape),) * 2, dtype=float,
                                   matvec=lambda r: self.pre.solve(r.reshape(shape)).ravel())


def solve_kdv(p: KdvProblem):
    """Newton-Krylov space-time solve, slab by slab.

    Returns ``(solution, report)``; ``solution(x, t)`` evaluates ``U``.
    """
    if p.epsilon <= 0 or p.alpha < 0:
        raise ValueError("need epsilon > 0 and alpha >= 0")
    ell = p.length
    ops = kdv_spatial_operators(p.N_x)
    grid = SlabGrid(p.T, p.L, p.N_t)
    h = grid.h
    # reference-slab operators: B dU/dtau + (h/2)(A U + c0 N(U)) = 0
    A = 0.5 * h * (p.epsilon**2 * 8.0 / ell**3 * ops.third + p.sigma * ell / 2.0 * ops.nonlocal_)
    c = 0.5 * h * p.alpha * 2.0 / ell
    slab = _SlabNewton(ops, A, c, p.N_t)
    u = _kdv_initial_coeffs(ops, p.U0, p.domain)
    report = NewtonReport()
    Us, starts = [], []
    for _ in range(grid.L):
        U = np.zeros((p.N_t, p.N_x))
        R = slab.residual(u, U)
        res = float(np.max(np.abs(R)))
        history = [res]
        it = 0
        gm_total = 0
        rises = 0
        while res >= p.newton_tol and it < p.newton_maxit:
            it += 1
            J = slab.jac(u, U)
            counter = []
            rhs = -R.ravel()
            dx, info = spla.gmres(J, rhs, M=slab.precond(U.shape), restart=p.gmres_restart,
                                  rtol=1e-3 * min(1.0, res), atol=0.1 * p.newton_tol, maxiter=20,
                                  callback=lambda r: counter.append(r), callback_type="pr_norm")
            gm_total += len(counter)
            if info < 0:
                raise NonConvergence("GMRES breakdown")
            step = dx.reshape(U.shape)
            lam = 1.0
            while True:
                Ut = U + lam * step
                Rt = slab.residual(u, Ut)
                rt = float(np.max(np.abs(Rt)))
                if rt < res or lam < 1.0 / 16:
                    break
                lam *= 0.5
            rises = rises + 1 if rt >= res else 0
            U, R, res = Ut, Rt, rt
            history.append(res)
            if rises >= 3:
                raise NewtonDivergence(f"residual grew for 3 consecutive steps (last {res:.3e})")
            if info > 0 and res >= p.newton_tol and it == p.newton_maxit:
                break
        if res >= p.newton_tol:
            log.warning("Newton stopped at residual %.3e after %d iterations", res, it)
        report.iterations.append(it)
        report.residuals.append(history)
        report.gmres_iterations.append(gm_total)
        Us.append(U)
        starts.append(u)
        k = np.arange(p.N_t)
        u = u + SQRT2 * ((k + 1) @ U)
    sol = SpaceTimeSolution(grid, Us, starts, _space_eval_factory("kdv", p.N_x, p.domain))
    return sol, report
