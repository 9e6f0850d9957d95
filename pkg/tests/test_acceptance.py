"""Acceptance criteria, one test per criterion.

Each test prints a single ``criterion NN: PASS|FAIL`` line with the measured
quantities and then asserts at the stated tolerance.  Wall-clock bounds are
checked against the stated desk-scale limits.
"""

import time
import warnings

import numpy as np
import pytest

from spectime import experiments as ex
from spectime.gbp import CrescentRegion, GbpParams, gbp_eval, gbp_zeros
from spectime.ldpg import (collocation_D, mass_matrix_legendre_test, mass_matrix_m1, solve_ivp)
from spectime.linalg import eigen
from spectime.models import KdvProblem, WaveProblem, soliton, solve_kdv, solve_wave


@pytest.fixture
def report(capsys):
    def _report(num, ok, detail, elapsed=None, budget=None):
        within = budget is None or elapsed <= budget
        status = "PASS" if ok and within else "FAIL"
        timing = "" if elapsed is None else f" [{elapsed:.1f}s / {budget}s]"
        with capsys.disabled():
            print(f"\ncriterion {num:02d}: {status} {detail}{timing}")
        assert ok, detail
        assert within, f"runtime {elapsed:.1f}s exceeds {budget}s"

    return _report


def test_criterion_01_gbp_zero_solver(report):
    t0 = time.perf_counter()
    worst = 0.0
    ok = True
    for n in (8, 16, 28, 51, 128):
        for alpha in (2, 3, 4, 5):
            zs = gbp_zeros(n, alpha)
            z = zs.zeros
            reg = CrescentRegion(n, alpha)
            d = np.abs(z[:, None] - z[None, :]) + np.eye(n)
            conj = set(map(complex, z)) == set(map(complex, np.conj(z)))
            ok &= bool(zs.residual_inf < 1e-10 * n and conj and d.min() > 0 and np.all(z.real < 0)
                       and np.all(reg.contains(z)) and np.all(reg.in_annulus(z)))
            worst = max(worst, zs.residual_inf / n)
    report(1, ok, f"max residual/N = {worst:.2e} (< 1e-10), enclosures hold",
           time.perf_counter() - t0, 10)


def test_criterion_02_closed_forms(report):
    t0 = time.perf_counter()
    m = np.sort_complex(eigen(mass_matrix_m1(2).todense(), False).values)
    mb = np.sort_complex(eigen(mass_matrix_legendre_test(2).todense(), False).values)
    d = np.sort_complex(eigen(collocation_D(2), False).values)
    e1 = np.max(np.abs(m - np.array([0.4 - 0.2j, 0.4 + 0.2j])))
    e2 = np.max(np.abs(mb - np.array([0.5 - 0.5j / np.sqrt(3), 0.5 + 0.5j / np.sqrt(3)])))
    e3 = np.max(np.abs(d - np.array([(3 - 1j * np.sqrt(3)) / 2, (3 + 1j * np.sqrt(3)) / 2])))
    report(2, e1 < 1e-14 and e2 < 1e-14 and e3 < 1e-12,
           f"M {e1:.1e}, Mbar {e2:.1e}, D {e3:.1e}", time.perf_counter() - t0, 1)


def test_criterion_03_eigen_zero_correspondence(report):
    t0 = time.perf_counter()
    dev = vec = 0.0
    for N in range(2, 13):
        M = mass_matrix_m1(N).todense()
        Mb = mass_matrix_legendre_test(N).todense()
        ev = np.sort_complex(eigen(M, False).values)
        evb = np.sort_complex(eigen(Mb, False).values)
        dev = max(dev, np.max(np.abs(ev - np.sort_complex(-gbp_zeros(N, 3).zeros))),
                  np.max(np.abs(evb - np.sort_complex(-gbp_zeros(N, 2).zeros))))
        for lam in -gbp_zeros(N, 3).zeros:
            b = gbp_eval(GbpParams(N - 1, 3), -lam)
            vec = max(vec, np.max(np.abs(M @ b - lam * b)))
    report(3, dev < 1e-8 and vec < 1e-8, f"eigen vs zeros {dev:.1e}, eigenvector residual {vec:.1e}",
           time.perf_counter() - t0, 5)


def test_criterion_04_real_eigenvalue_asymptotics(report):
    # eig(D) = 1/eig(Mbar) = -1/z; naive QR on D is unreliable at this size
    t0 = time.perf_counter()
    N = 51
    r = ex.real_eigenvalue_D(N)
    q = abs(r["zero_based"] * 1.50888 / N - 1)
    report(4, q < 0.15, f"real eigenvalue {r['zero_based']:.4f} (naive QR {r['naive']:.4f}), "
           f"|lambda*nu/N - 1| = {q:.4f}", time.perf_counter() - t0, 1)


def test_criterion_05_thm41_exact(report):
    t0 = time.perf_counter()
    ok = all(ex.check_thm41(N)["exact_equal"] for N in (4, 16, 40))
    report(5, ok, "rational M2 == J4^2 for N in {4, 16, 40}", time.perf_counter() - t0, 5)


def test_criterion_06_second_order_perturbation(report):
    t0 = time.perf_counter()
    r = ex.perturbation_study(2, (16, 32, 64))
    gaps = ", ".join(f"{g:.2e}" for g in r["gaps"])
    report(6, -3.6 <= r["slope"] <= -2.4, f"gaps {gaps}, slope {r['slope']:.2f} in [-3.6, -2.4]",
           time.perf_counter() - t0, 30)


def test_criterion_07_third_order_corners_and_gap(report):
    t0 = time.perf_counter()
    res = [ex.check_prop51(N) for N in (8, 16, 32)]
    support = all(r["support_ok"] for r in res)
    ratios = [res[i + 1]["max_entry"] / res[i]["max_entry"] for i in range(2)]
    halves = all(abs(q / 2**-3 - 1) <= 0.4 for q in ratios)
    r = ex.perturbation_study(3, (16, 32, 64))
    ok = support and halves and -4.6 <= r["slope"] <= -3.4
    report(7, ok, f"support ok={support}, entry ratios {ratios[0]:.3f}, {ratios[1]:.3f} (1/8 +-40%), "
           f"gap slope {r['slope']:.2f} in [-4.6, -3.4]", time.perf_counter() - t0, 60)


def test_criterion_08_cube_of_mass_matrix(report):
    t0 = time.perf_counter()
    dev = ex.check_cor51(10)["max_deviation"]
    report(8, dev < 1e-8, f"eig(M^3) vs eig(M)^3 {dev:.1e}", time.perf_counter() - t0, 1)


TABLE = {20: (1.0143, 1.0708), 50: (1.0029, 1.0533), 100: (1.0009, 1.0513)}


def test_criterion_09_table(report):
    t0 = time.perf_counter()
    rows = ex.conditioning_table((20, 50, 100))
    ok = True
    parts = []
    for r in rows:
        lo, hi = TABLE[r["N_x"]]
        good = (abs(r["cond2"] - 1.8730) <= 0.005 and abs(r["min_modulus"] - lo) <= 1e-3
                and abs(r["max_modulus"] - hi) <= 1e-3)
        ok &= good
        parts.append(f"N_x={r['N_x']}: cond {r['cond2']:.4f}, min {r['min_modulus']:.4f}/{lo}, "
                     f"max {r['max_modulus']:.4f}/{hi} (naive {r['naive_max_modulus']:.4f})")
    report(9, ok, "; ".join(parts), time.perf_counter() - t0, 10)


def test_criterion_10_conditioning_of_E(report):
    t0 = time.perf_counter()
    c = [r["cond2_E"] for r in ex.cond_E(range(4, 21))]
    inc = all(b > a for a, b in zip(c, c[1:]))
    ratio = c[-1] / c[6]
    report(10, inc and ratio >= 1e3, f"strictly increasing={inc}, cond(E_20)/cond(E_10) = {ratio:.2e}",
           time.perf_counter() - t0, 5)


def test_criterion_11_scalar_ivps(report):
    t0 = time.perf_counter()
    t = np.linspace(-1, 1, 201)
    e1 = max(np.max(np.abs(solve_ivp(1, s, [1.0], 24)(t) - np.exp(s * (t + 1)))) for s in (1.0, -1.0))
    e2 = np.max(np.abs(solve_ivp(2, 1.0, [1.0, 1.0], 24)(t) - np.exp(t + 1)))
    e3 = max(np.max(np.abs(solve_ivp(3, 1.0, [1.0] * 3, 32, strategy=s)(t) - np.exp(t + 1)))
             for s in ("direct", "first_order_system"))
    report(11, e1 < 1e-12 and e2 < 1e-11 and e3 < 1e-9, f"m=1 {e1:.1e}, m=2 {e2:.1e}, m=3 {e3:.1e}",
           time.perf_counter() - t0, 5)


def test_criterion_12_wave_strategies(report):
    t0 = time.perf_counter()
    x = np.linspace(-50, 50, 401)
    ts = np.linspace(0, 10, 21)

    def diff(a, b):
        return max(np.max(np.abs(a(x, t) - b(x, t))) for t in ts)

    qz = solve_wave(WaveProblem(), "qz")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        dg = solve_wave(WaveProblem(), "diag")
    single = solve_wave(WaveProblem(N_t=100, L=1), "qz")
    d_strat = diff(qz, dg)
    d_single = diff(qz, single)
    ref = solve_wave(WaveProblem(N_x=320), "qz")
    errs = [diff(solve_wave(WaveProblem(N_x=n), "qz"), ref) for n in (40, 80, 160)]
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    ok = d_strat < 1e-7 and d_single < 1e-7 and min(ratios) >= 10
    report(12, ok, f"diag vs qz {d_strat:.1e}, single vs multi-domain {d_single:.1e} (< 1e-7), "
           f"N_x errors {errs[0]:.1e}, {errs[1]:.1e}, {errs[2]:.1e}", time.perf_counter() - t0, 300)


def test_criterion_13_kdv_soliton(report):
    t0 = time.perf_counter()
    x = np.linspace(-50, 50, 801)
    ts = np.linspace(0, 10, 21)
    errs = []
    for n in (80, 120, 160):
        sol, _ = solve_kdv(KdvProblem(N_x=n, N_t=40))
        errs.append(max(np.max(np.abs(sol(x, t) - soliton(x, t))) for t in ts))
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    ok = errs[-1] < 1e-5 and min(ratios) >= 5
    report(13, ok, f"errors {errs[0]:.2e}, {errs[1]:.2e}, {errs[2]:.2e} (last < 1e-5), "
           f"ratios {ratios[0]:.0f}, {ratios[1]:.0f} (>= 5)", time.perf_counter() - t0, 600)


def test_criterion_14_instability_demo(report):
    t0 = time.perf_counter()
    d56 = ex.matched_gap(eigen(mass_matrix_legendre_test(56).todense(), False).values,
                         -gbp_zeros(56, 2).zeros)
    d28 = ex.matched_gap(eigen(mass_matrix_legendre_test(28).todense(), False).values,
                         -gbp_zeros(28, 2).zeros)
    report(14, d56 > 1e-2 and d28 < 1e-6, f"N=56 deviation {d56:.2e} (> 1e-2), N=28 {d28:.2e} (< 1e-6)",
           time.perf_counter() - t0, 5)
