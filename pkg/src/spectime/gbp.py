"""Generalised Bessel polynomials B_n^(alpha, beta) and their zeros.

The polynomials are normalised by ``B_n(0) = 1``; ``beta`` only rescales
the argument, so zeros for general ``beta`` are ``beta/2`` times the zeros
for ``beta = 2``.  Zeros are computed by Newton's method on the system

    F_i(z) = alpha/(2 z_i) + 1/z_i^2 + sum_{j != i} 1/(z_i - z_j) = 0,

which vanishes exactly at the zero set of ``B_n^(alpha)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .banded import BandedMatrix
from .errors import AdmissibilityError, NonConvergence

log = logging.getLogger(__name__)

OVERFLOW_LIMIT = 1e280


@dataclass(frozen=True)
class GbpParams:
    n: int
    alpha: float
    beta: float = 2.0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("degree must be non-negative")
        if self.n >= 1 and self.n + self.alpha - 1 <= 0:
            raise ValueError("need n + alpha - 1 > 0")
        if self.beta == 0:
            raise ValueError("beta must be nonzero")
        if self.alpha <= 0 and float(self.alpha).is_integer():
            raise ValueError("-alpha must not be a non-negative integer")


@dataclass(frozen=True)
class CrescentRegion:
    """Enclosure of the zeros of ``B_n^(alpha)``: annulus, cardioid and sector."""

    n: int
    alpha: float

    @property
    def inner_radius(self) -> float:
        return 2.0 / (2 * self.n + self.alpha - 2.0 / 3.0)

    @property
    def outer_radius(self) -> float:
        return 2.0 / (self.n + self.alpha - 1)

    @property
    def cardioid_scale(self) -> float:
        return 1.0 / (self.n + self.alpha - 1)

    @property
    def sector_angle(self) -> float:
        return math.acos(-self.alpha / (2 * self.n + self.alpha - 2))

    def contains(self, z):
        """Membership test; the cardioid bound is treated as inclusive."""
        z = np.asarray(z, dtype=complex)
        rho, theta = np.abs(z), np.angle(z)
        # np.angle returns -pi on the negative real axis for -0.0 imaginary parts
        theta = np.where(theta == -np.pi, np.pi, theta)
        card = self.cardioid_scale * (1.0 - np.cos(theta))
        ok = (rho > self.inner_radius) & (rho <= card * (1 + 4 * np.finfo(float).eps))
        return ok & (np.abs(theta) > self.sector_angle)

    def in_annulus(self, z):
        rho = np.abs(np.asarray(z, dtype=complex))
        return (rho > self.inner_radius) & (rho <= self.outer_radius * (1 + 4 * np.finfo(float).eps))

    def mid_curve(self, theta):
        """Radius halfway between the inner circle and the cardioid."""
        theta = np.asarray(theta, dtype=float)
        return 0.5 * (self.inner_radius + self.cardioid_scale * (1.0 - np.cos(theta)))


@dataclass(frozen=True)
class GbpZeroSet:
    params: GbpParams
    zeros: np.ndarray
    residual_inf: float
    iterations: int = 0
    strategy: str = "newton"
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.zeros.size

    def real_zeros(self) -> np.ndarray:
        return self.zeros[self.zeros.imag == 0].real


def recurrence_coeffs(n: int, alpha):
    """``(a_n, b_n, c_n)`` of ``B_{n+1} = (a z/beta + b) B_n + c B_{n-1}``.

    Exact ``Fraction`` output when ``alpha`` is an ``int`` or ``Fraction``.
    """
    if n < 1:
        raise ValueError("recurrence index must be >= 1")
    al = Fraction(alpha) if isinstance(alpha, (int, Fraction)) else float(alpha)
    d1 = n + al - 1
    d2 = 2 * n + al - 2
    if d1 == 0 or d2 == 0:
        raise ValueError(f"degenerate recurrence for n={n}, alpha={alpha}")
    a = (2 * n + al) * (2 * n + al - 1) / d1
    b = (al - 2) * (2 * n + al - 1) / (d1 * d2)
    c = n * (2 * n + al) / (d1 * d2)
    return a, b, c


def gbp_eval(params: GbpParams, z) -> np.ndarray:
    """``[B_0(z), ..., B_n(z)]`` by the three-term recurrence.

    ``z`` may be an array; the degree index is the last axis.
    """
    n, al, be = params.n, params.alpha, params.beta
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape + (n + 1,), dtype=complex)
    out[..., 0] = 1.0
    if n >= 1:
        out[..., 1] = 1.0 + al * z / be
    for k in range(1, n):
        a, b, c = recurrence_coeffs(k, al)
        out[..., k + 1] = (a * z / be + b) * out[..., k] + c * out[..., k - 1]
    if np.any(~np.isfinite(out)) or np.any(np.abs(out) > OVERFLOW_LIMIT):
        raise OverflowError("generalised Bessel recurrence overflowed; use pasquini_residual")
    return out


def gbp_explicit(params: GbpParams, z) -> complex:
    """``B_n(z)`` from the explicit hypergeometric-type sum (cross-check)."""
    n, al, be = params.n, params.alpha, params.beta
    w = complex(z) / be
    term, total = 1.0 + 0j, 1.0 + 0j
    for k in range(1, n + 1):
        # binom(n,k) Gamma(n+k+al-1)/Gamma(n+al-1) w^k, built term by term
        term *= (n - k + 1) / k * (n + k + al - 2) * w
        total += term
    return total


def jacobi_matrix(n: int, alpha, exact: bool = False) -> BandedMatrix:
    """Tri-diagonal ``J`` with ``-z b(z) = J b(z) - tau B_n(z) e_n``.

    ``b(z) = (B_0(z), ..., B_{n-1}(z))`` with ``beta = 2``; the eigenvalues
    of ``J`` are the negated zeros of ``B_n^(alpha)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    one = Fraction(1) if exact else 1.0
    al = Fraction(alpha) if exact else float(alpha)
    diag = [2 * one / al]
    sup = [-2 * one / al]
    sub = []
    for k in range(1, n):
        a, b, c = recurrence_coeffs(k, al)
        diag.append(2 * b / a)
        sub.append(2 * c / a)
        sup.append(-2 * one / a)
    return BandedMatrix.from_diagonals(n, {-1: sub, 0: diag, 1: sup[: n - 1]}, exact=exact)


def jacobi_tail(n: int, alpha) -> float:
    """The coefficient ``tau`` multiplying ``B_n e_n`` in the matrix recurrence."""
    if n == 1:
        return 2.0 / alpha
    a, _, _ = recurrence_coeffs(n - 1, float(alpha))
    return 2.0 / a


def real_zero_estimate(n: int, alpha: float) -> float:
    """Asymptotic estimate of the single real zero for odd ``n``."""
    if n % 2 == 0:
        raise ValueError("real-zero estimate is defined for odd n")
    return -2.0 / (1.3254868 * n + 1.00628995 * alpha - 1.34983648)


def pasquini_residual(alpha: float, z):
    """Return ``(F, J)``: the zero-system residual and its Jacobian."""
    z = np.asarray(z, dtype=complex)
    n = z.size
    if n and np.min(np.abs(z)) < 1e-14:
        raise AdmissibilityError("a point coincides with the origin")
    diff = z[:, None] - z[None, :]
    np.fill_diagonal(diff, np.inf)
    if n > 1 and np.min(np.abs(diff)) < 1e-14:
        raise AdmissibilityError("two points coincide")
    inv = 1.0 / diff
    F = alpha / (2 * z) + 1.0 / z**2 + inv.sum(axis=1)
    inv2 = inv * inv
    J = inv2.copy()
    np.fill_diagonal(J, -alpha / (2 * z**2) - 2.0 / z**3 - inv2.sum(axis=1))
    return F, J


def initial_guess(n: int, alpha: float) -> np.ndarray:
    """Conjugate-symmetric start on the crescent's mid-curve."""
    reg = CrescentRegion(n, alpha) if n >= 2 else None
    if n == 1:
        return np.array([-2.0 / alpha], dtype=complex)
    m = n // 2
    theta0 = reg.sector_angle
    # m angles strictly inside (theta0, pi); the real zero (odd n) sits at pi
    k = np.arange(1, m + 1)
    span = np.pi - theta0
    theta = theta0 + span * (k - 0.5) / (m + (0.5 if n % 2 else 0.0))
    w = reg.mid_curve(theta) * np.exp(1j * theta)
    pts = [w, np.conj(w)]
    if n % 2:
        pts.append(np.array([real_zero_estimate(n, alpha)], dtype=complex))
    return np.concatenate(pts)


def _newton(alpha, z, tol, maxit, damped=False):
    n = z.size
    F, J = pasquini_residual(alpha, z)
    res = np.max(np.abs(F))
    it = 0
    stall = 0
    for it in range(1, maxit + 1):
        if res <= _target(tol, n):
            return z, res, it - 1
        if stall >= 3:
            break
        step = np.linalg.solve(J, -F)
        lam = 1.0
        while True:
            trial = z + lam * step
            try:
                Ft, Jt = pasquini_residual(alpha, trial)
                rt = np.max(np.abs(Ft))
            except AdmissibilityError:
                rt = np.inf
            if not damped or rt <= (1 - 1e-4 * lam) * res or lam < 1e-6:
                break
            lam *= 0.5
        if not np.isfinite(rt):
            break
        stall = stall + 1 if rt >= res else 0
        z, F, J, res = trial, Ft, Jt, rt
    return z, res, it


def _target(tol, n):
    # F has O(n^2) terms of size O(n^2), so the floating-point floor grows like eps*n^2
    return max(tol * n, 2.5e-14 * n * n)


def symmetrise(z: np.ndarray) -> np.ndarray:
    """Pair each zero with its nearest conjugate partner and average.

    Returns upper-half zeros (by decreasing argument), then the real zero if
    ``z.size`` is odd, then the conjugates; conjugacy holds bitwise.
    """
    z = np.asarray(z, dtype=complex)
    n = z.size
    order = np.argsort(np.abs(z.imag))
    real = None
    rest = z
    if n % 2:
        real = complex(z[order[0]].real, 0.0)
        rest = np.delete(z, order[0])
    upper = list(rest[np.argsort(-rest.imag)][: rest.size // 2])
    lower = list(np.conj(rest[np.argsort(-rest.imag)][rest.size // 2:]))
    paired = []
    for u in upper:
        k = int(np.argmin([abs(u - l) for l in lower]))
        paired.append(0.5 * (u + lower.pop(k)))
    w = np.array(paired, dtype=complex)
    w = w[np.argsort(-np.angle(w))]
    parts = [w] + ([np.array([real])] if real is not None else []) + [np.conj(w)]
    return np.concatenate(parts)


def gbp_zeros(n: int, alpha: float, tol: float = 1e-12, beta: float = 2.0,
              maxit: int = 200, seed: int = 0) -> GbpZeroSet:
    """Zeros of ``B_n^(alpha, beta)`` by Newton's method on ``F(z) = 0``.

    On failure the solver retries with damped Newton, then a warm start
    from degree ``n - 1``, then a small random perturbation of the start.
    Raises :class:`NonConvergence` when all of these fail.
    """
    params = GbpParams(n, alpha, beta)
    if n < 1:
        raise ValueError("n must be >= 1")
    if alpha < -1:
        raise ValueError("zero solver requires alpha >= -1")
    if n == 1:
        z = np.array([-2.0 / alpha + 0j])
        F, _ = pasquini_residual(alpha, z)
        return GbpZeroSet(params, z * (beta / 2), float(np.max(np.abs(F))), 0, "closed-form")

    best = (None, np.inf, 0, "")
    z0 = initial_guess(n, alpha)
    attempts = [("newton", lambda: _newton(alpha, z0, tol, maxit)),
                ("damped", lambda: _newton(alpha, z0, tol, maxit, damped=True)),
                ("continuation", lambda: _newton(alpha, _continuation_start(n, alpha, tol), tol, maxit, True)),
                ("perturbed", lambda: _newton(alpha, _perturbed(z0, seed), tol, maxit, True))]
    for name, run in attempts:
        try:
            z, res, it = run()
        except (AdmissibilityError, np.linalg.LinAlgError) as exc:
            log.debug("gbp_zeros(%d, %g): %s failed: %s", n, alpha, name, exc)
            continue
        if res < best[1]:
            best = (z, res, it, name)
        if res <= _target(tol, n):
            zs = symmetrise(z)
            F, _ = pasquini_residual(alpha, zs)
            rs = float(np.max(np.abs(F)))
            if rs <= 4 * _target(tol, n):
                return GbpZeroSet(params, zs * (beta / 2), rs, it, name)
        log.debug("gbp_zeros(%d, %g): %s stalled at %.3e", n, alpha, name, res)
    raise NonConvergence(f"zero solver failed for n={n}, alpha={alpha}", best=best[1])


def _continuation_start(n, alpha, tol):
    prev, _, _ = _newton(alpha, initial_guess(n - 1, alpha), tol, maxit=60, damped=True)
    shrink = (n - 1 + alpha - 1) / (n + alpha - 1)
    extra = real_zero_estimate(n, alpha) if n % 2 else -CrescentRegion(n, alpha).inner_radius * 1.2
    return np.concatenate([prev * shrink, [extra + 1e-3j * abs(extra)]])


def _perturbed(z0, seed):
    rng = np.random.default_rng(seed)
    scale = 1e-3 * np.abs(z0)
    return z0 + scale * (rng.standard_normal(z0.size) + 1j * rng.standard_normal(z0.size))
