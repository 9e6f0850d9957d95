"""Legendre dual-Petrov-Galerkin matrices, compact bases and IVP solvers.

For order ``m`` the trial functions satisfy ``phi^(l)(-1) = 0`` and the test
functions ``psi^(l)(1) = 0`` for ``l < m``; both are combinations of
``P_k .. P_{k+m}`` normalised so that ``(phi_k^(m), phi_j^*) = delta_jk``.
The mass matrices ``M^(m)_{jk} = (phi_k, phi_j^*)`` are assembled from
closed forms, in float or exact-rational mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, sqrt

import numpy as np
import scipy.linalg as sla

from .banded import BandedMatrix, tridiagonal
from .errors import Resonance
from .polybasis import (endpoint_derivative, derivative_coeffs, legendre_vander,
                        legval, quadrature)

SQRT2 = sqrt(2.0)


@dataclass(frozen=True)
class CompactBasis:
    """One basis function ``scale * sum_i combo[i] P_{k+i}``.

    ``m`` is 1, 2, 3 or ``"kdv"``; ``side`` is ``"trial"`` or ``"test"``.
    ``combo`` is kept as exact fractions; ``scale`` may be irrational.
    """

    m: object
    side: str
    k: int
    combo: tuple
    scale: float

    def coeffs(self, size: int | None = None) -> np.ndarray:
        """Legendre coefficient vector (length ``size``, default k + len(combo))."""
        size = self.k + len(self.combo) if size is None else size
        c = np.zeros(size)
        for i, v in enumerate(self.combo):
            c[self.k + i] = self.scale * float(v)
        return c

    def __call__(self, t):
        return legval(self.coeffs(), t)

    def derivative_coeffs(self, order: int = 1) -> np.ndarray:
        c = self.coeffs()
        for _ in range(order):
            c = derivative_coeffs(c)
        return c


def _closed_form(m, side, k):
    F = Fraction
    sgn = 1 if side == "trial" else -1
    if m == 1:
        combo = (F(1), F(sgn))
        scale = (k + 1) / SQRT2 if side == "trial" else 1.0 / (SQRT2 * (k + 1))
        return combo, scale
    if m == 2:
        a, b = F(2 * k + 3, k + 2), F(k + 1, k + 2)
        combo = (F(1), sgn * a, b)
        scale = (k + 2) / SQRT2 if side == "trial" else 1.0 / (SQRT2 * (k + 1) * (2 * k + 3))
        return combo, scale
    if m == 3:
        a = F(3 * (2 * k + 3), 2 * k + 5)
        b = F(3 * (k + 1), k + 3)
        c = F((k + 1) * (2 * k + 3), (k + 3) * (2 * k + 5))
        combo = (F(1), sgn * a, b, sgn * c)
        if side == "trial":
            scale = (k + 2) * (k + 3) / (2.0 * (2 * k + 3))
        else:
            scale = 1.0 / ((k + 1) * (k + 2) * (2 * k + 3))
        return combo, scale
    raise ValueError(f"unsupported order {m!r}")


def endpoint_combo(k: int, conditions) -> tuple:
    """Coefficients over ``P_k .. P_{k+len(conditions)}`` with leading 1.

    ``conditions`` is a list of ``(order, side)`` pairs; each imposes
    ``phi^(order)(side) = 0``.  Solved exactly in rationals.
    """
    n = len(conditions)
    rows = [[Fraction(endpoint_derivative(k + i, o, s)) for i in range(n + 1)]
            for o, s in conditions]
    # unknowns x_1..x_n with x_0 = 1: A x = -col0
    A = [r[1:] + [-r[0]] for r in rows]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            raise ValueError(f"singular endpoint system at k={k}")
        A[col], A[piv] = A[piv], A[col]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col] / A[col][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return (Fraction(1),) + tuple(A[i][n] / A[i][i] for i in range(n))


KDV_TRIAL = [(0, 1), (0, -1), (1, 1)]
KDV_TEST = [(0, 1), (0, -1), (1, -1)]


def _kdv_basis(side, k):
    trial = endpoint_combo(k, KDV_TRIAL)
    if side == "trial":
        return trial, 1.0
    test = endpoint_combo(k, KDV_TEST)
    # scale the test function so that (phi_k''', psi_k) = 1
    d3 = np.array([Fraction(0)] * k + list(trial), dtype=object)
    for _ in range(3):
        d3 = derivative_coeffs(d3)
    pair = sum(d3[k + i] * test[i] * Fraction(2, 2 * (k + i) + 1)
               for i in range(len(test)) if k + i < d3.size)
    return test, 1.0 / float(pair)


def compact_basis(m, side: str, k: int) -> CompactBasis:
    """Trial (``side="trial"``) or dual test basis function number ``k``."""
    if side not in ("trial", "test"):
        raise ValueError("side must be 'trial' or 'test'")
    if k < 0:
        raise ValueError("k must be non-negative")
    if m == "kdv":
        combo, scale = _kdv_basis(side, k)
    else:
        combo, scale = _closed_form(m, side, k)
    return CompactBasis(m, side, k, combo, scale)


def basis_matrix(m, side: str, N: int, size: int | None = None) -> np.ndarray:
    """Columns are Legendre coefficients of basis functions ``0 .. N-1``."""
    width = 3 if m == "kdv" else m
    size = N + width if size is None else size
    return np.column_stack([compact_basis(m, side, k).coeffs(size) for k in range(N)])


def _fr(exact):
    return Fraction if exact else float


def mass_matrix_m1(N: int, exact: bool = False) -> BandedMatrix:
    """Tri-diagonal mass matrix of the first-order scheme."""
    if N < 1:
        raise ValueError("N must be >= 1")
    F = _fr(exact)
    j = range(N)
    sub = [F(i) / ((i + 1) * (2 * i + 1)) for i in range(1, N)]
    diag = [F(1) / (2 * i + 1) - F(1) / (2 * i + 3) for i in j]
    sup = [-F(i + 2) / ((i + 1) * (2 * i + 3)) for i in range(N - 1)]
    return tridiagonal(sub, diag, sup, exact=exact)


def mass_matrix_legendre_test(N: int, exact: bool = False) -> BandedMatrix:
    """Mass matrix when the test functions are the Legendre polynomials."""
    if N < 1:
        raise ValueError("N must be >= 1")
    F = _fr(exact)
    sub = [F(1) / (2 * i + 1) for i in range(1, N)]
    diag = [F(1)] + [F(0)] * (N - 1)
    sup = [-F(1) / (2 * i + 1) for i in range(N - 1)]
    return tridiagonal(sub, diag, sup, exact=exact)


def collocation_D(N: int) -> np.ndarray:
    """Collocation matrix of ``u' = sigma u`` at the Legendre-Gauss points.

    ``D_ij = delta_ij/(1+t_j) + (1+t_i)/(1+t_j) l_j'(t_i)``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    t = quadrature("gauss", N).nodes
    diff = t[:, None] - t[None, :]
    np.fill_diagonal(diff, 1.0)
    w = 1.0 / np.prod(diff, axis=0)
    # barycentric weights rescaled to avoid under/overflow
    w = w / np.max(np.abs(w))
    L = (w[None, :] / w[:, None]) / diff
    np.fill_diagonal(L, 0.0)
    np.fill_diagonal(L, -L.sum(axis=1))
    s = 1.0 + t
    return np.diag(1.0 / s) + (s[:, None] / s[None, :]) * L


def collocation_similarity(N: int) -> np.ndarray:
    """``Phi`` with ``D = Phi Mbar^{-1} Phi^{-1}``; columns sample the h_k basis.

    ``h_0 = (1+t)/sqrt(2)`` and ``h_k = (P_{k+1} - P_{k-1})/sqrt(2)``.
    """
    t = quadrature("gauss", N).nodes
    V = legendre_vander(t, N)
    Phi = np.empty((N, N))
    Phi[:, 0] = (1.0 + t) / SQRT2
    for k in range(1, N):
        Phi[:, k] = (V[:, k + 1] - V[:, k - 1]) / SQRT2
    return Phi


def _m2_parts(N, exact):
    F = _fr(exact)

    def c(k):
        return F(k + 2)

    def d(j):
        # c_k d_j with the two 1/sqrt(2) factors merged
        return F(1) / (2 * (j + 1) * (2 * j + 3))

    diags = {-2: [], -1: [], 0: [], 1: [], 2: []}
    for j in range(2, N):
        diags[-2].append(F(2 * (j - 1)) / (j * (2 * j + 1)) * d(j) * c(j - 2))
    for j in range(1, N):
        diags[-1].append(F(4) / ((j + 1) * (j + 2)) * d(j) * c(j - 1))
    for j in range(N):
        g = F(2) / (2 * j + 1) - F(2 * (2 * j + 3)) / (j + 2) ** 2 \
            + (F(j + 1) / (j + 2)) ** 2 * F(2) / (2 * j + 5)
        diags[0].append(g * d(j) * c(j))
    for j in range(N - 1):
        diags[1].append(-F(4) / ((j + 2) * (j + 3)) * d(j) * c(j + 1))
    for j in range(N - 2):
        diags[2].append(F(2 * (j + 1)) / ((j + 2) * (2 * j + 5)) * d(j) * c(j + 2))
    return diags


def mass_matrix_m2(N: int, variant: str = "pseudospectral", exact: bool = False) -> BandedMatrix:
    """Penta-diagonal mass matrix of the second-order scheme.

    The variants differ only in the corner entry ``(N-1, N-1)``: quadrature
    on the Gauss-Lobatto grid (``pseudospectral``) or exact integration.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    F = _fr(exact)
    diags = _m2_parts(N, exact)
    if variant == "pseudospectral":
        corner = F(-N**3 - 2 * N**2 + 4 * N + 2) / (N * (N + 1) ** 2 * (2 * N - 1) * (2 * N + 1))
    elif variant == "spectral":
        corner = -F(2 * (N**2 + N - 3)) / (N * (N + 1) * (2 * N - 1) * (2 * N + 3))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    diags[0][N - 1] = corner
    return BandedMatrix.from_diagonals(N, diags, exact=exact)


def mass_matrix_m3(N: int, exact: bool = False) -> BandedMatrix:
    """Seven-diagonal mass matrix of the third-order scheme."""
    if N < 3:
        raise ValueError("N must be >= 3")
    F = _fr(exact)

    def gam(j):
        return F(2) / (2 * j + 1)

    def a(k):
        return F(3 * (2 * k + 3)) / (2 * k + 5)

    def b(k):
        return F(3 * (k + 1)) / (k + 3)

    def c(k):
        return F((k + 1) * (2 * k + 3)) / ((k + 3) * (2 * k + 5))

    def de(k, j):
        # d_k e_j
        return F((k + 2) * (k + 3)) / (2 * (2 * k + 3)) / ((j + 1) * (j + 2) * (2 * j + 3))

    def entry(j, k):
        o = k - j
        if o == -3:
            return de(k, j) * c(k) * gam(j)
        if o == -2:
            return de(k, j) * (b(k) * gam(j) - c(k) * a(j) * gam(j + 1))
        if o == -1:
            return de(k, j) * (a(k) * gam(j) - b(k) * a(j) * gam(j + 1) + c(k) * b(j) * gam(j + 2))
        if o == 0:
            return de(k, j) * (gam(j) - a(j) ** 2 * gam(j + 1) + b(j) ** 2 * gam(j + 2)
                               - c(j) ** 2 * gam(j + 3))
        if o == 1:
            return de(k, j) * (-a(j) * gam(j + 1) + a(k) * b(j) * gam(j + 2) - b(k) * c(j) * gam(j + 3))
        if o == 2:
            return de(k, j) * (b(j) * gam(j + 2) - a(k) * c(j) * gam(j + 3))
        return -de(k, j) * c(j) * gam(j + 3)

    diags = {o: [entry(j, j + o) for j in range(max(0, -o), min(N, N - o))] for o in range(-3, 4)}
    return BandedMatrix.from_diagonals(N, diags, exact=exact)


def breve_matrix(N: int, exact: bool = False) -> BandedMatrix:
    """Jacobi matrix of ``B_n^(5)`` in the form used for the third-order scheme."""
    if N < 1:
        raise ValueError("N must be >= 1")
    F = _fr(exact)
    sub = [F(j) / ((j + 2) * (2 * j + 3)) for j in range(1, N)]
    diag = [F(6) / ((2 * j + 3) * (2 * j + 5)) for j in range(N)]
    sup = [-F(j + 4) / ((j + 2) * (2 * j + 5)) for j in range(N - 1)]
    return tridiagonal(sub, diag, sup, exact=exact)


def mass_matrix(m: int, N: int, variant: str = "pseudospectral", exact: bool = False) -> BandedMatrix:
    if m == 1:
        return mass_matrix_m1(N, exact)
    if m == 2:
        return mass_matrix_m2(N, variant, exact)
    if m == 3:
        return mass_matrix_m3(N, exact)
    raise ValueError("direct mass matrices exist for m <= 3 only")


def lift_coeffs(inits) -> np.ndarray:
    """Legendre coefficients of ``sum_l u_l (1+t)^l / l!``."""
    m = len(inits)
    mono = np.zeros(m)
    # (1+t)^l expanded in powers of t
    for l, u in enumerate(inits):
        for p in range(l + 1):
            mono[p] += u / (factorial(p) * factorial(l - p))
    return np.polynomial.legendre.poly2leg(mono)


@dataclass(frozen=True)
class IvpSolution:
    m: int
    sigma: float
    inits: tuple
    coeffs: np.ndarray
    strategy: str
    legendre: np.ndarray = field(repr=False)

    def __call__(self, t):
        return legval(self.legendre, t)


def _test_moments(m, N, poly_leg):
    """``(p, phi_j^*)`` for a polynomial given by Legendre coefficients."""
    deg = poly_leg.size - 1
    rule = quadrature("gauss", (deg + N + m + 8) // 2 + 1)
    Psi = legendre_vander(rule.nodes, N + m - 1) @ basis_matrix(m, "test", N)
    return Psi.T @ (rule.weights * legval(poly_leg, rule.nodes))


def _solve_shifted(Mm, sigma, rhs):
    A = np.eye(Mm.shape[0]) - sigma * Mm
    lu, piv = sla.lu_factor(A, check_finite=True)
    if np.min(np.abs(np.diag(lu))) < 1e-14 * np.max(np.abs(A)):
        raise Resonance("1/sigma is (numerically) an eigenvalue of the mass matrix")
    return sla.lu_solve((lu, piv), rhs)


def solve_ivp(m: int, sigma: float, inits, N: int, strategy: str = "direct",
              variant: str = "pseudospectral") -> IvpSolution:
    """Solve ``u^(m) = sigma u`` on (-1, 1) with ``u^(l)(-1) = inits[l]``."""
    inits = tuple(float(u) for u in inits)
    if m < 1 or len(inits) != m:
        raise ValueError("need m >= 1 and exactly m initial values")
    if sigma == 0:
        raise ValueError("sigma must be nonzero")
    if strategy == "direct":
        if m > 3:
            raise ValueError("direct strategy requires m <= 3")
        Mm = mass_matrix(m, N, variant).todense()
        lift = lift_coeffs(inits)
        g = _test_moments(m, N, lift)
        v = _solve_shifted(Mm, sigma, sigma * g)
        leg = basis_matrix(m, "trial", N) @ v
        leg[: lift.size] += lift
    elif strategy == "first_order_system":
        M = mass_matrix_m1(N).todense()
        e1 = np.zeros(N)
        e1[0] = SQRT2
        Mp = [np.linalg.matrix_power(M, p) for p in range(m + 1)]
        rhs = sigma * Mp[m - 1] @ (inits[0] * e1)
        for l in range(1, m):
            rhs = rhs + Mp[l - 1] @ (inits[l] * e1)
        v = _solve_shifted(Mp[m], sigma, rhs)
        leg = basis_matrix(1, "trial", N) @ v
        leg[0] += inits[0]
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return IvpSolution(m, float(sigma), inits, v, strategy, leg)


def change_of_basis_pencil(N: int, P, Q):
    """Pencil ``(Q P, Q M P)`` for new trial/test bases; spectrum is basis-free."""
    from .linalg import cond2

    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    for name, X in (("P", P), ("Q", Q)):
        if X.shape != (N, N):
            raise ValueError(f"{name} must be {N}x{N}")
        if cond2(X) > 1e8:
            raise ValueError(f"{name} is too close to singular")
    M = mass_matrix_m1(N).todense()
    return Q @ P, Q @ M @ P
