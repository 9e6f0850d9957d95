"""Multiprecision reference values (mpmath).

Double-precision QR is unreliable on the non-normal LDPG matrices, so
reference eigenvalues are computed here by Newton's method in extended
precision: on ``B_n^(alpha)`` itself for the zeros, and on the
characteristic determinant (evaluated by banded LU with a carried
derivative) for perturbed banded matrices.
"""

from __future__ import annotations

import mpmath as mp
import numpy as np

from .errors import NonConvergence
from .gbp import gbp_zeros


def _mp_matrix_rows(A, lower, upper):
    data = np.asarray(A.data if hasattr(A, "data") else A, dtype=object)
    n = data.shape[0]
    rows = []
    for i in range(n):
        lo, hi = max(0, i - lower), min(n, i + upper + 1)
        rows.append({j: mp.mpf(data[i, j].numerator) / data[i, j].denominator
                     if hasattr(data[i, j], "numerator") else mp.mpf(float(data[i, j]))
                     for j in range(lo, hi)})
    return rows


def _recurrence_mp(n, alpha):
    al = mp.mpf(alpha)
    out = []
    for k in range(1, n):
        d1 = k + al - 1
        d2 = 2 * k + al - 2
        out.append(((2 * k + al) * (2 * k + al - 1) / d1,
                    (al - 2) * (2 * k + al - 1) / (d1 * d2),
                    k * (2 * k + al) / (d1 * d2)))
    return out


def _bessel_and_deriv(n, alpha, coeffs, z):
    # beta = 2
    b0, b1 = mp.mpc(1), 1 + alpha * z / 2
    d0, d1 = mp.mpc(0), mp.mpc(alpha) / 2
    for a, b, c in coeffs[: n - 1]:
        b0, b1, d0, d1 = (b1, (a * z / 2 + b) * b1 + c * b0,
                          d1, a / 2 * b1 + (a * z / 2 + b) * d1 + c * d0)
    return b1, d1


def reference_zeros(n: int, alpha, dps: int = 50, maxit: int = 40) -> np.ndarray:
    """Zeros of ``B_n^(alpha)`` polished by Newton in ``dps`` digits.

    Returns an object array of ``mpc`` values in the order of
    :func:`gbp_zeros`.
    """
    # the recurrence cancels heavily near the zeros; pad the working precision
    with mp.workdps(dps + 2 * n):
        coeffs = _recurrence_mp(n, alpha)
        al = mp.mpf(alpha)
        tol = mp.mpf(10) ** (-(dps // 2))
        out = []
        for z0 in gbp_zeros(n, float(alpha)).zeros:
            z = mp.mpc(z0.real, z0.imag)
            for _ in range(maxit):
                B, dB = _bessel_and_deriv(n, al, coeffs, z)
                step = B / dB
                z -= step
                if abs(step) <= tol * abs(z):
                    break
            else:
                raise NonConvergence(f"zero polish failed for n={n}", best=float(abs(step)))
            out.append(z)
    return np.array(out, dtype=object)


def _logdet_deriv(rows, n, lower, upper, mu):
    """``d/dmu log det(A - mu I)`` by banded LU without pivoting."""
    C = [dict(r) for r in rows]
    dC = [{} for _ in range(n)]
    for i in range(n):
        C[i][i] = C[i].get(i, 0) - mu
        dC[i][i] = mp.mpf(-1)
    s = mp.mpc(0)
    for k in range(n):
        u = C[k][k]
        du = dC[k].get(k, 0)
        if u == 0:
            raise ZeroDivisionError
        s += du / u
        for i in range(k + 1, min(n, k + lower + 1)):
            cik = C[i].get(k, 0)
            if cik == 0 and dC[i].get(k, 0) == 0:
                continue
            l = cik / u
            dl = (dC[i].get(k, 0) * u - cik * du) / (u * u)
            for j in range(k + 1, min(n, k + upper + 1)):
                ckj = C[k].get(j, 0)
                dckj = dC[k].get(j, 0)
                C[i][j] = C[i].get(j, 0) - l * ckj
                dC[i][j] = dC[i].get(j, 0) - dl * ckj - l * dckj
    return s


def perturbed_eigenvalues(A, starts, lower: int | None = None, upper: int | None = None,
                          dps: int = 50, maxit: int = 60) -> np.ndarray:
    """Eigenvalues of a banded matrix by Newton on its characteristic determinant.

    ``starts`` are nearby approximations (one per eigenvalue).  The result
    is checked for distinctness and against the trace; :class:`NonConvergence`
    is raised when either check fails.
    """
    lower = A.lower if lower is None else lower
    upper = A.upper if upper is None else upper
    n = A.shape[0]
    with mp.workdps(dps + 2 * n):
        rows = _mp_matrix_rows(A, lower, upper)
        tol = mp.mpf(10) ** (-(dps // 2))
        # Aberth-Ehrlich sweeps: Newton on det with implicit deflation of the
        # other approximations, which keeps iterates from merging
        out = [mp.mpc(complex(s0).real, complex(s0).imag) for s0 in starts]
        for _ in range(maxit):
            big = mp.mpf(0)
            for j in range(n):
                mu = out[j]
                try:
                    g = _logdet_deriv(rows, n, lower, upper, mu)
                except ZeroDivisionError:
                    out[j] = mu + tol * (1 + abs(mu))
                    big = mp.inf
                    continue
                g -= mp.fsum(1 / (mu - out[i]) for i in range(n) if i != j)
                step = 1 / g
                out[j] = mu - step
                big = max(big, abs(step) / abs(out[j]))
            if big <= tol:
                break
        else:
            raise NonConvergence("determinant iteration did not converge", best=float(big))
        trace = mp.fsum(rows[i][i] for i in range(n))
        scale = mp.fsum(abs(v) for v in out)
        if abs(mp.fsum(out) - trace) > mp.mpf(10) ** (-(dps // 2)) * scale:
            raise NonConvergence("eigenvalue set fails the trace check")
        vals = np.array([complex(v) for v in out])
        d = np.abs(vals[:, None] - vals[None, :])
        np.fill_diagonal(d, np.inf)
        if n > 1 and np.min(d) < 1e-12 * np.max(np.abs(vals)):
            raise NonConvergence("Newton converged twice to the same eigenvalue")
    return np.array(out, dtype=object)


def to_complex(values) -> np.ndarray:
    return np.array([complex(v) for v in values])
