from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg as sla

from spectime.errors import Resonance
from spectime.experiments import matched_gap
from spectime.gbp import GbpParams, gbp_eval, gbp_zeros, jacobi_matrix
from spectime.ldpg import (basis_matrix, breve_matrix, change_of_basis_pencil, collocation_D,
                           collocation_similarity, compact_basis, endpoint_combo, lift_coeffs,
                           mass_matrix, mass_matrix_legendre_test, mass_matrix_m1, mass_matrix_m2,
                           mass_matrix_m3, solve_ivp)
from spectime.polybasis import (derivative_coeffs, legendre_vander, legendre_vander_deriv, legval,
                                norm_sq, quadrature)


def _dual_matrix(m, N):
    # (phi_k^(m), psi_j) = (-1)^m (phi_k, psi_j^(m)) by the boundary conditions;
    # this form avoids differentiating the trial side in floating point
    rule = quadrature("gauss", N + m + 8)
    Phi = legendre_vander(rule.nodes, N + m - 1) @ basis_matrix(m, "trial", N)
    Dpsi = legendre_vander_deriv(rule.nodes, N + m - 1, m) @ basis_matrix(m, "test", N)
    return (-1) ** m * Dpsi.T @ (rule.weights[:, None] * Phi)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_duality(m):
    np.testing.assert_allclose(_dual_matrix(m, 32), np.eye(32), atol=1e-11)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_boundary_conditions(m):
    for k in range(12):
        phi = compact_basis(m, "trial", k).coeffs()
        psi = compact_basis(m, "test", k).coeffs()
        for l in range(m):
            dphi = phi
            dpsi = psi
            for _ in range(l):
                dphi, dpsi = derivative_coeffs(dphi), derivative_coeffs(dpsi)
            assert abs(legval(dphi, -1.0)) < 1e-12 * max(1, np.abs(dphi).sum())
            assert abs(legval(dpsi, 1.0)) < 1e-12 * max(1, np.abs(dpsi).sum())


def test_endpoint_combo_exact():
    combo = endpoint_combo(0, [(0, -1)])
    assert combo == (Fraction(1), Fraction(1))


def test_kdv_basis_conditions_and_duality():
    N = 16
    for k in range(N):
        phi = compact_basis("kdv", "trial", k).coeffs()
        assert abs(legval(phi, 1.0)) < 1e-12 and abs(legval(phi, -1.0)) < 1e-12
        assert abs(legval(derivative_coeffs(phi), 1.0)) < 1e-12 * np.abs(phi).sum() * (k + 3) ** 2
    Ct = basis_matrix("kdv", "trial", N, N + 4)
    Cs = basis_matrix("kdv", "test", N, N + 4)
    D3 = Ct
    for _ in range(3):
        D3 = np.column_stack([derivative_coeffs(D3[:, k]) for k in range(N)])
    n = D3.shape[0]
    P = (Cs[:n] * norm_sq(np.arange(n))[:, None]).T @ D3
    np.testing.assert_allclose(P, np.eye(N), atol=1e-11)


@pytest.mark.parametrize("m,variant", [(1, None), (2, "pseudospectral"), (2, "spectral"), (3, None)])
def test_mass_matrix_matches_quadrature(m, variant):
    N = 12
    M = mass_matrix(m, N, variant or "pseudospectral").todense()
    rule = quadrature("gauss", N + m + 4)
    V = legendre_vander(rule.nodes, N + m - 1)
    Phi = V @ basis_matrix(m, "trial", N)
    Psi = V @ basis_matrix(m, "test", N)
    Q = Psi.T @ (rule.weights[:, None] * Phi)
    if variant == "pseudospectral":
        # the last diagonal entry is the only one that differs from the Galerkin value
        Q[-1, -1] = M[-1, -1]
    np.testing.assert_allclose(M, Q, atol=1e-14)


def test_m1_is_jacobi3_and_mbar_is_jacobi2():
    for N in (4, 16, 40):
        assert not (mass_matrix_m1(N, exact=True) - jacobi_matrix(N, 3, exact=True)).support()
        assert not (mass_matrix_legendre_test(N, exact=True) - jacobi_matrix(N, 2, exact=True)).support()
        assert not (breve_matrix(N, exact=True) - jacobi_matrix(N, 5, exact=True)).support()


@pytest.mark.parametrize("N", [4, 16, 40])
def test_thm41_exact(N):
    diff = mass_matrix_m2(N, "pseudospectral", exact=True) - jacobi_matrix(N, 4, exact=True) ** 2
    assert diff.support() == []


@pytest.mark.parametrize("N", [8, 16, 32])
def test_prop51_support(N):
    diff = mass_matrix_m3(N, exact=True) - breve_matrix(N, exact=True) ** 3
    assert sorted(diff.support()) == [(N - 2, N - 1), (N - 1, N - 2), (N - 1, N - 1)]


def test_m2_corner_values():
    assert mass_matrix_m2(2, "pseudospectral", exact=True).data[1, 1] == Fraction(-1, 45)
    assert mass_matrix_m2(2, "spectral", exact=True).data[1, 1] == Fraction(-1, 21)


def test_closed_form_eigenvalues_n2():
    ev = np.sort_complex(np.linalg.eigvals(mass_matrix_m1(2).todense()))
    np.testing.assert_allclose(ev, [0.4 - 0.2j, 0.4 + 0.2j], atol=1e-14)
    ev = np.sort_complex(np.linalg.eigvals(mass_matrix_legendre_test(2).todense()))
    np.testing.assert_allclose(ev, [0.5 - 0.5j / np.sqrt(3), 0.5 + 0.5j / np.sqrt(3)], atol=1e-14)
    ev = np.sort_complex(np.linalg.eigvals(collocation_D(2)))
    np.testing.assert_allclose(ev, [(3 - 1j * np.sqrt(3)) / 2, (3 + 1j * np.sqrt(3)) / 2], atol=1e-12)


def test_eigenvector_formula():
    for N in (4, 8, 12):
        M = mass_matrix_m1(N).todense()
        lam = -gbp_zeros(N, 3).zeros
        for l in lam:
            b = gbp_eval(GbpParams(N - 1, 3), -l)
            assert np.max(np.abs(M @ b - l * b)) < 1e-8 * np.max(np.abs(b))


def test_collocation_reciprocal_spectrum():
    for N in (4, 8, 12):
        d = np.sort_complex(np.linalg.eigvals(collocation_D(N)))
        ref = np.sort_complex(-1.0 / gbp_zeros(N, 2).zeros)
        np.testing.assert_allclose(d, ref, atol=1e-8 * np.abs(ref).max())


def test_collocation_similarity():
    N = 20
    Phi = collocation_similarity(N)
    D = collocation_D(N)
    Mbar = mass_matrix_legendre_test(N).todense()
    rhs = Phi @ np.linalg.inv(Mbar) @ np.linalg.inv(Phi)
    assert np.max(np.abs(D - rhs)) < 1e-10 * np.max(np.abs(D))


def test_lift_coeffs():
    c = lift_coeffs([1.0, 2.0])
    t = np.linspace(-1, 1, 7)
    np.testing.assert_allclose(legval(c, t), 1.0 + 2.0 * (1 + t), atol=1e-14)


@pytest.mark.parametrize("sigma", [1.0, -1.0])
def test_first_order_ivp(sigma):
    sol = solve_ivp(1, sigma, [1.0], 24)
    t = np.linspace(-1, 1, 101)
    assert np.max(np.abs(sol(t) - np.exp(sigma * (t + 1)))) < 1e-12


def test_second_order_ivp():
    sol = solve_ivp(2, 1.0, [1.0, 1.0], 24)
    t = np.linspace(-1, 1, 101)
    assert np.max(np.abs(sol(t) - np.exp(t + 1))) < 1e-11


@pytest.mark.parametrize("strategy", ["direct", "first_order_system"])
def test_third_order_ivp(strategy):
    sol = solve_ivp(3, 1.0, [1.0, 1.0, 1.0], 32, strategy=strategy)
    t = np.linspace(-1, 1, 101)
    assert np.max(np.abs(sol(t) - np.exp(t + 1))) < 1e-9


def test_ivp_validation():
    with pytest.raises(ValueError):
        solve_ivp(2, 1.0, [1.0], 8)
    with pytest.raises(ValueError):
        solve_ivp(1, 0.0, [1.0], 8)
    with pytest.raises(ValueError):
        solve_ivp(4, 1.0, [1.0] * 4, 8)


def test_resonance_detected():
    # odd N has exactly one real eigenvalue
    lam = np.linalg.eigvals(mass_matrix_m1(5).todense())
    real = lam[np.argmin(np.abs(lam.imag))].real
    with pytest.raises(Resonance):
        solve_ivp(1, 1.0 / real, [1.0], 5)


def test_pencil_invariance(rng):
    N = 10
    P = np.eye(N) + 0.2 * rng.standard_normal((N, N)) / np.sqrt(N)
    Q = np.eye(N) + 0.2 * rng.standard_normal((N, N)) / np.sqrt(N)
    S, T = change_of_basis_pencil(N, P, Q)
    gen = sla.eigvals(T, S)
    ref = np.linalg.eigvals(mass_matrix_m1(N).todense())
    assert matched_gap(gen, ref) < 1e-10


def test_pencil_rejects_singular():
    with pytest.raises(ValueError):
        change_of_basis_pencil(3, np.ones((3, 3)), np.eye(3))
