"""Reproducible numerical experiments shared by the CLI and the tests.

Each function returns plain dictionaries or arrays so that callers can
serialise them directly.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment

from .gbp import gbp_zeros, jacobi_matrix
from .ldpg import (breve_matrix, change_of_basis_pencil, collocation_D, mass_matrix,
                   mass_matrix_legendre_test, mass_matrix_m1, mass_matrix_m2, mass_matrix_m3)
from .linalg import cond2, eigen
from .precise import perturbed_eigenvalues, reference_zeros, to_complex
from .timesolver import eigenpairs_m1


def matched_gap(a, b) -> float:
    """Max distance between two point sets under the optimal one-to-one matching."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.size != b.size:
        raise ValueError("sets must have equal size")
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(np.max(cost[r, c])) if a.size else 0.0


def loglog_slope(ns, values) -> float:
    return float(np.polyfit(np.log(ns), np.log(values), 1)[0])


def reference_eigenvalues(m: int, N: int, variant: str = "pseudospectral") -> np.ndarray | None:
    """Zero-based eigenvalues of the mass matrix, where a closed form exists.

    ``m = 1``: ``-z`` for zeros of ``B_N^(3)``; ``m = 2`` pseudospectral:
    ``z^2`` for ``B_N^(4)``.  Other cases return ``None``.
    """
    if m == 1:
        return -gbp_zeros(N, 3).zeros
    if m == 2 and variant == "pseudospectral":
        return gbp_zeros(N, 4).zeros ** 2
    return None


def eig_mass(m: int, N: int, variant: str = "pseudospectral") -> dict:
    M = mass_matrix(m, N, variant).todense()
    naive = eigen(M, want_vectors=False).values
    ref = reference_eigenvalues(m, N, variant)
    out = {"naive": naive, "reference": ref}
    if ref is not None:
        out["max_deviation"] = matched_gap(naive, ref)
    return out


def collocation_eig(N: int) -> dict:
    """Eigenvalues of the Legendre collocation matrix against ``-1/z`` for ``B_N^(2)``."""
    naive = eigen(collocation_D(N), want_vectors=False).values
    ref = -1.0 / gbp_zeros(N, 2).zeros
    return {"naive": naive, "reference": ref, "max_deviation": matched_gap(naive, ref)}


def real_eigenvalue_D(N: int) -> dict:
    """Real eigenvalue of the collocation matrix for odd ``N``.

    The zero-based value is ``-1/Z`` with ``Z`` the real zero of ``B_N^(2)``;
    the naive double-precision value is reported alongside for comparison.
    """
    if N % 2 == 0:
        raise ValueError("N must be odd")
    z = gbp_zeros(N, 2).real_zeros()[0]
    naive = eigen(collocation_D(N), want_vectors=False).values
    return {"N": N, "zero_based": float(-1.0 / z),
            "naive": float(naive[np.argmin(np.abs(naive.imag))].real)}


def check_thm41(N: int) -> dict:
    diff = mass_matrix_m2(N, "pseudospectral", exact=True) - jacobi_matrix(N, 4, exact=True) ** 2
    return {"N": N, "exact_equal": not diff.support()}


def check_prop51(N: int) -> dict:
    diff = mass_matrix_m3(N, exact=True) - breve_matrix(N, exact=True) ** 3
    support = diff.support()
    dense = diff.todense()
    big = max((abs(Fraction(dense[i, j])) for i, j in support), default=Fraction(0))
    expected = [(N - 2, N - 1), (N - 1, N - 2), (N - 1, N - 1)]
    return {"N": N, "support": support, "support_ok": sorted(support) == sorted(expected),
            "max_entry": float(big)}


def check_cor51(N: int) -> dict:
    M = mass_matrix_m1(N).todense()
    ev = eigen(M, want_vectors=False).values
    ev3 = eigen(np.linalg.matrix_power(M, 3), want_vectors=False).values
    return {"N": N, "max_deviation": matched_gap(ev3, ev**3)}


def check_pencil_invariance(N: int, seed: int = 0) -> dict:
    """Spectrum of ``(Q P, Q M P)`` equals that of ``M`` for random well-conditioned ``P, Q``."""
    rng = np.random.default_rng(seed)
    P = np.eye(N) + 0.3 * rng.standard_normal((N, N)) / np.sqrt(N)
    Q = np.eye(N) + 0.3 * rng.standard_normal((N, N)) / np.sqrt(N)
    S, T = change_of_basis_pencil(N, P, Q)
    gen = sla.eigvals(T, S)
    ref = -gbp_zeros(N, 3).zeros
    return {"N": N, "max_deviation": matched_gap(gen, ref)}


def perturbation_study(m: int, Ns=(16, 32, 64), dps: int = 50) -> dict:
    """Gap between perturbed-matrix eigenvalues and their zero-based surrogates.

    ``m = 2``: spectral mass matrix against ``z^2`` (zeros of ``B_N^(4)``);
    ``m = 3``: ``M^(3)`` against ``(-z)^3`` (zeros of ``B_N^(5)``).  The
    perturbed eigenvalues are computed in extended precision.
    """
    gaps = []
    for N in Ns:
        if m == 2:
            surrogate = gbp_zeros(N, 4).zeros ** 2
            A = mass_matrix_m2(N, "spectral", exact=True)
        elif m == 3:
            surrogate = (-gbp_zeros(N, 5).zeros) ** 3
            A = mass_matrix_m3(N, exact=True)
        else:
            raise ValueError("perturbation study needs m in {2, 3}")
        ev = to_complex(perturbed_eigenvalues(A, surrogate, dps=dps))
        gaps.append(matched_gap(ev, surrogate))
    return {"m": m, "N": list(Ns), "gaps": gaps, "slope": loglog_slope(Ns, gaps)}


def conditioning_table(Nxs=(20, 50, 100)) -> list[dict]:
    """``cond2(I + M_x)`` and extreme eigenvalue moduli (zero-based and naive)."""
    rows = []
    for N in Nxs:
        A = np.eye(N) + mass_matrix_m1(N).todense()
        exact = np.abs(1.0 - gbp_zeros(N, 3).zeros)
        naive = np.abs(eigen(A, want_vectors=False).values)
        rows.append({"N_x": N, "cond2": cond2(A), "min_modulus": float(exact.min()),
                     "max_modulus": float(exact.max()), "naive_min_modulus": float(naive.min()),
                     "naive_max_modulus": float(naive.max())})
    return rows


def cond_E(N_ts=range(4, 21)) -> list[dict]:
    return [{"N_t": n, "cond2_E": cond2(eigenpairs_m1(n)[1])} for n in N_ts]


def instability_demo(N: int, dps: int = 50) -> dict:
    """Naive double-precision eigenvalues of ``M-bar`` against the zero-based values."""
    zs = gbp_zeros(N, 2)
    ref = -zs.zeros
    naive = eigen(mass_matrix_legendre_test(N).todense(), want_vectors=False).values
    precise = to_complex(reference_zeros(N, 2, dps=dps))
    return {"N": N, "naive_max_deviation": matched_gap(naive, ref),
            "reference_residual": zs.residual_inf,
            "reference_vs_multiprecision": float(np.max(np.abs(zs.zeros - precise))),
            "naive": naive, "reference": ref}

