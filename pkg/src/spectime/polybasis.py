"""Legendre polynomials, Gauss-type quadrature and coefficient-space calculus.

Coefficient vectors hold Legendre coefficients ``c[0] .. c[n]``.  The
calculus routines accept float arrays as well as object arrays of
:class:`fractions.Fraction` so the closed-form matrices can be checked in
exact arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from .errors import DomainError, NonConvergence

_NEWTON_TOL = 1e-15
_NEWTON_MAXIT = 100


@dataclass(frozen=True)
class LegendreSeries:
    """Finite Legendre expansion ``sum_k coeffs[k] P_k``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coeffs must be a non-empty 1-D sequence")
        if c.dtype != object and not np.all(np.isfinite(c)):
            raise ValueError("coeffs must be finite")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, x):
        return legval(self.coeffs, x)

    def derivative(self) -> "LegendreSeries":
        return LegendreSeries(derivative_coeffs(self.coeffs))

    def antiderivative(self) -> "LegendreSeries":
        return antiderivative(self)


@dataclass(frozen=True)
class QuadratureRule:
    kind: str
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, values):
        """Apply the rule to samples taken at ``nodes`` (first axis)."""
        return np.tensordot(self.weights, values, axes=(0, 0))

    def __len__(self):
        return self.nodes.size


def _check_x(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1 + 1e-12):
        raise DomainError("Legendre evaluation requires |x| <= 1")
    return x


def eval_legendre(n: int, x: float) -> np.ndarray:
    """Return ``[P_0(x), ..., P_n(x)]``."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    return legendre_vander(np.atleast_1d(_check_x(x)), n)[0]


def legendre_vander(x, n: int) -> np.ndarray:
    """Matrix ``V[i, k] = P_k(x_i)`` for ``k <= n`` (no domain check)."""
    x = np.asarray(x, dtype=float)
    V = np.empty(x.shape + (n + 1,))
    V[..., 0] = 1.0
    if n >= 1:
        V[..., 1] = x
    for k in range(1, n):
        V[..., k + 1] = ((2 * k + 1) * x * V[..., k] - k * V[..., k - 1]) / (k + 1)
    return V


def legendre_vander_deriv(x, n: int, order: int = 1) -> np.ndarray:
    """Matrix of ``order``-th derivatives ``P_k^{(order)}(x_i)``.

    Uses the differentiated recurrence, so it is valid at the endpoints.
    """
    x = np.asarray(x, dtype=float)
    V = legendre_vander(x, n)
    for m in range(1, order + 1):
        # (k+1) P_{k+1}^{(m)} = (2k+1)(x P_k^{(m)} + m P_k^{(m-1)}) - k P_{k-1}^{(m)}
        W = np.zeros_like(V)
        for k in range(0, n):
            prev = W[..., k - 1] if k >= 1 else 0.0
            W[..., k + 1] = ((2 * k + 1) * (x * W[..., k] + m * V[..., k]) - k * prev) / (k + 1)
        V = W
    return V


def legval(coeffs, x):
    """Evaluate a Legendre series by Clenshaw's recurrence."""
    c = np.asarray(coeffs, dtype=float)
    x = np.asarray(x, dtype=float)
    b1 = np.zeros_like(x)
    b2 = np.zeros_like(x)
    for k in range(c.size - 1, 0, -1):
        # alpha_k = (2k+1) x/(k+1), beta_{k+1} = -(k+1)/(k+2)
        b1, b2 = c[k] + (2 * k + 1) / (k + 1) * x * b1 - (k + 1) / (k + 2) * b2, b1
    return c[0] + x * b1 - 0.5 * b2


def special_values(n: int):
    """``(P_n(1), P_n(-1), P_n'(1), P_n'(-1))`` as exact integers."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    return (
        endpoint_derivative(n, 0, 1),
        endpoint_derivative(n, 0, -1),
        endpoint_derivative(n, 1, 1),
        endpoint_derivative(n, 1, -1),
    )


def endpoint_derivative(n: int, order: int, side: int) -> int:
    """``P_n^{(order)}(side)`` for ``side`` in {+1, -1}, exactly."""
    if order > n:
        return 0
    val = factorial(n + order) // (factorial(n - order) * 2**order * factorial(order))
    return val if side > 0 or (n + order) % 2 == 0 else -val


def _gauss_nodes(n: int) -> np.ndarray:
    k = np.arange(1, n + 1)
    x = -np.cos(np.pi * (4 * k - 1) / (4 * n + 2))
    for _ in range(_NEWTON_MAXIT):
        V = legendre_vander(x, n)
        p, q = V[:, n], V[:, n - 1]
        dp = n * (x * p - q) / (x * x - 1.0)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) <= _NEWTON_TOL:
            return x
    raise NonConvergence(f"Gauss node iteration failed for n={n}", best=float(np.max(np.abs(dx))))


def _lobatto_interior(n: int) -> np.ndarray:
    # zeros of P'_{m}, m = n - 1
    m = n - 1
    if m < 2:
        return np.empty(0)
    x = -np.cos(np.pi * np.arange(1, m) / m)
    for _ in range(_NEWTON_MAXIT):
        V = legendre_vander(x, m)
        p, q = V[:, m], V[:, m - 1]
        dp = m * (x * p - q) / (x * x - 1.0)
        d2p = (2 * x * dp - m * (m + 1) * p) / (1.0 - x * x)
        dx = dp / d2p
        x = x - dx
        if np.max(np.abs(dx)) <= _NEWTON_TOL:
            return x
    raise NonConvergence(f"Lobatto node iteration failed for n={n}", best=float(np.max(np.abs(dx))))


def quadrature(kind: str, npoints: int) -> QuadratureRule:
    """Legendre-Gauss (``"gauss"``) or Gauss-Lobatto (``"gauss-lobatto"``) rule."""
    if kind == "gauss":
        if npoints < 1:
            raise ValueError("gauss rule needs at least one point")
        if npoints == 1:
            return QuadratureRule(kind, np.zeros(1), np.full(1, 2.0))
        x = _gauss_nodes(npoints)
        V = legendre_vander(x, npoints)
        dp = npoints * (x * V[:, npoints] - V[:, npoints - 1]) / (x * x - 1.0)
        w = 2.0 / ((1.0 - x * x) * dp * dp)
        # symmetrise to remove Newton round-off asymmetry
        x = 0.5 * (x - x[::-1])
        w = 0.5 * (w + w[::-1])
        return QuadratureRule(kind, x, w)
    if kind in ("gauss-lobatto", "lobatto"):
        if npoints < 2:
            raise ValueError("gauss-lobatto rule needs at least two points")
        x = np.concatenate(([-1.0], _lobatto_interior(npoints), [1.0]))
        m = npoints - 1
        p = legendre_vander(x, m)[:, m]
        w = 2.0 / (npoints * (npoints - 1) * p * p)
        x = 0.5 * (x - x[::-1])
        w = 0.5 * (w + w[::-1])
        return QuadratureRule("gauss-lobatto", x, w)
    raise ValueError(f"unknown quadrature kind {kind!r}")


def _as_coeffs(series):
    if isinstance(series, LegendreSeries):
        return series.coeffs
    return np.asarray(series)


def _zeros_like(c, size):
    return np.array([Fraction(0)] * size, dtype=object) if c.dtype == object else np.zeros(size)


def derivative_coeffs(coeffs) -> np.ndarray:
    """Legendre coefficients of the derivative (degree drops by one)."""
    c = _as_coeffs(coeffs)
    n = c.size - 1
    if n == 0:
        return _zeros_like(c, 1)
    d = _zeros_like(c, n + 2)
    # d_{k-1} = (2k-1) (c_k + d_{k+1}/(2k+3)),  d_k := 0 for k >= n
    for k in range(n, 0, -1):
        d[k - 1] = (2 * k - 1) * (c[k] + d[k + 1] / (2 * k + 3))
    return d[:n]


def antiderivative(series) -> LegendreSeries:
    """Symmetric primitive ``(int_{-1}^x - int_x^1)/2`` of a Legendre series.

    Each ``P_n`` (n >= 1) contributes ``(P_{n+1} - P_{n-1})/(2n+1)``, which
    vanishes at both endpoints; ``P_0`` maps to ``P_1``.
    """
    c = _as_coeffs(series)
    n = c.size - 1
    out = _zeros_like(c, n + 2)
    out[1] = out[1] + c[0]
    for k in range(1, n + 1):
        out[k + 1] = out[k + 1] + c[k] / (2 * k + 1)
        out[k - 1] = out[k - 1] - c[k] / (2 * k + 1)
    return LegendreSeries(out)


def project(f, n: int) -> LegendreSeries:
    """Legendre coefficients of ``f`` up to degree ``n`` by Gauss quadrature."""
    rule = quadrature("gauss", n + 16)
    fx = np.asarray(f(rule.nodes), dtype=float) * np.ones_like(rule.nodes)
    V = legendre_vander(rule.nodes, n)
    k = np.arange(n + 1)
    return LegendreSeries((2 * k + 1) / 2 * (V.T @ (rule.weights * fx)))


def norm_sq(k):
    """``gamma_k = (P_k, P_k) = 2/(2k+1)``."""
    return 2.0 / (2 * np.asarray(k) + 1)
