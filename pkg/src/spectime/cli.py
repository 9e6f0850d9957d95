"""Command-line driver: ``spectime <command> [options]``.

Tabular output is CSV with 17 significant digits (complex values as
``re, im`` column pairs).  ``--json`` prints a summary record with keys
``command, params, metrics, status``.  Exit code 2 signals invalid input,
3 a solver failure; both print a JSON error record.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
import time
import warnings

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment

from . import experiments as ex
from .errors import DomainError, SpectimeError
from .gbp import gbp_zeros
from .ldpg import solve_ivp
from .models import KdvProblem, WaveProblem, soliton, solve_kdv, solve_wave

EXIT_VALIDATION = 2
EXIT_SOLVER = 3


class ValidationError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _ints(text):
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _floats(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def write_csv(header, rows, stream) -> None:
    stream.write(",".join(header) + "\n")
    for r in rows:
        stream.write(",".join(_fmt(v) for v in r) + "\n")


def _complex_rows(values, ref=None):
    rows = []
    for j, v in enumerate(np.asarray(values, dtype=complex)):
        row = [j, v.real, v.imag]
        if ref is not None:
            w = complex(ref[j])
            row += [w.real, w.imag]
        rows.append(row)
    return rows


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


# commands: each returns (metrics, csv_header, csv_rows)

def cmd_gbp_zeros(a):
    zs = gbp_zeros(a.n, a.alpha, tol=a.tol)
    rows = [[a.n, a.alpha, z.real, z.imag, zs.residual_inf] for z in zs.zeros]
    metrics = {"residual_inf": zs.residual_inf, "iterations": zs.iterations, "strategy": zs.strategy}
    return metrics, ["n", "alpha", "re", "im", "residual"], rows


def cmd_eig_mass(a):
    r = ex.eig_mass(a.m, a.n, a.variant)
    header = ["j", "re", "im"]
    if r["reference"] is not None:
        header += ["ref_re", "ref_im"]
    metrics = {"max_deviation": r.get("max_deviation")}
    ref = r["reference"]
    if ref is not None:
        # list each naive value next to its matched reference
        cost = np.abs(r["naive"][:, None] - ref[None, :])
        _, col = linear_sum_assignment(cost)
        ref = ref[col]
    return metrics, header, _complex_rows(r["naive"], ref)


def cmd_collocation_eig(a):
    r = ex.collocation_eig(a.n)
    _, col = linear_sum_assignment(np.abs(r["naive"][:, None] - r["reference"][None, :]))
    return ({"max_deviation": r["max_deviation"]}, ["j", "re", "im", "ref_re", "ref_im"],
            _complex_rows(r["naive"], r["reference"][col]))


def cmd_verify_identities(a):
    Ns = a.n
    if a.identity == "thm4.1":
        res = [ex.check_thm41(N) for N in Ns]
        ok = all(r["exact_equal"] for r in res)
        rows = [[r["N"], int(r["exact_equal"])] for r in res]
        return {"passed": ok, "results": res}, ["N", "exact_equal"], rows
    if a.identity == "prop5.1":
        res = [ex.check_prop51(N) for N in Ns]
        ok = all(r["support_ok"] for r in res)
        rows = [[r["N"], int(r["support_ok"]), r["max_entry"]] for r in res]
        return {"passed": ok, "results": res}, ["N", "support_ok", "max_entry"], rows
    if a.identity == "cor5.1":
        res = [ex.check_cor51(N) for N in Ns]
        ok = all(r["max_deviation"] < 1e-8 for r in res)
        rows = [[r["N"], r["max_deviation"]] for r in res]
        return {"passed": ok, "results": res}, ["N", "max_deviation"], rows
    res = [ex.check_pencil_invariance(N, seed=0) for N in Ns]
    ok = all(r["max_deviation"] < 1e-8 for r in res)
    rows = [[r["N"], r["max_deviation"]] for r in res]
    return {"passed": ok, "results": res}, ["N", "max_deviation"], rows


def cmd_perturbation_study(a):
    r = ex.perturbation_study(a.m, tuple(a.n), dps=a.dps)
    rows = [[N, g] for N, g in zip(r["N"], r["gaps"])]
    return {"gaps": r["gaps"], "slope": r["slope"]}, ["N", "gap"], rows


def cmd_solve_ivp(a):
    if len(a.inits) != a.m:
        raise ValidationError(f"--inits needs exactly m = {a.m} values")
    sol = solve_ivp(a.m, a.sigma, a.inits, a.n, strategy=a.strategy, variant=a.variant)
    t = np.linspace(-1.0, 1.0, a.points)
    u = sol(t)
    exact = _ivp_exact(a.m, a.sigma, a.inits, t)
    err = float(np.max(np.abs(u - exact)))
    rows = [[ti, ui, ei] for ti, ui, ei in zip(t, u, exact)]
    return {"max_error": err}, ["t", "u", "exact"], rows


def _ivp_exact(m, sigma, inits, t):
    # companion system y' = C y, y = (u, u', ..., u^(m-1))
    C = np.diag(np.ones(m - 1), 1)
    C[-1, 0] = sigma
    y0 = np.asarray(inits, dtype=float)
    return np.array([(sla.expm(C * (ti + 1.0)) @ y0)[0] for ti in t])


def _grid(domain, T, nx, nt):
    return np.linspace(domain[0], domain[1], nx), np.linspace(0.0, T, nt)


def cmd_solve_wave(a):
    p = WaveProblem(sigma=a.sigma, domain=tuple(a.domain), T=a.T, N_x=a.nx, N_t=a.nt, L=a.L)
    t0 = time.perf_counter()
    sol = solve_wave(p, a.strategy, cap=a.diag_cap) if a.strategy == "diag" else solve_wave(p, "qz")
    elapsed = time.perf_counter() - t0
    xs, ts = _grid(p.domain, p.T, a.grid_x, a.grid_t)
    rows = [[x, t, u] for t in ts for x, u in zip(xs, sol(xs, t))]
    jumps = sol.interface_jumps()
    metrics = {"elapsed_s": elapsed, "max_abs_u": float(max(abs(r[2]) for r in rows)),
               "max_interface_jump": float(jumps.max()) if jumps.size else 0.0,
               "max_residual": float(max(d["residual"] for d in sol.diagnostics)),
               "slabs": [{k: v for k, v in d.items()} for d in sol.diagnostics]}
    return metrics, ["x", "t", "u"], rows


def cmd_solve_kdv(a):
    p = KdvProblem(alpha=a.alpha, epsilon=a.epsilon, sigma=a.sigma, domain=tuple(a.domain), T=a.T,
                   N_x=a.nx, N_t=a.nt, L=a.L)
    t0 = time.perf_counter()
    sol, rep = solve_kdv(p)
    elapsed = time.perf_counter() - t0
    xs, ts = _grid(p.domain, p.T, a.grid_x, a.grid_t)
    rows = [[x, t, u] for t in ts for x, u in zip(xs, sol(xs, t))]
    metrics = {"elapsed_s": elapsed, "newton_iterations": rep.iterations,
               "gmres_iterations": rep.gmres_iterations,
               "final_residuals": [h[-1] for h in rep.residuals],
               "max_abs_u": float(max(abs(r[2]) for r in rows))}
    if a.alpha == 1 and a.epsilon == 1 and a.sigma == 0:
        metrics["soliton_error_inf"] = float(max(abs(u - soliton(x, t)) for x, t, u in rows))
    return metrics, ["x", "t", "u"], rows


def cmd_conditioning(a):
    table = ex.conditioning_table(tuple(a.nx))
    header = ["N_x", "cond2", "min_modulus", "max_modulus", "naive_min_modulus", "naive_max_modulus"]
    rows = [[r[h] for h in header] for r in table]
    metrics = {"table": table}
    if a.nt:
        metrics["cond2_E"] = ex.cond_E(a.nt)
    return metrics, header, rows


def cmd_instability_demo(a):
    r = ex.instability_demo(a.n, dps=a.dps)
    _, col = linear_sum_assignment(np.abs(r["naive"][:, None] - r["reference"][None, :]))
    metrics = {k: r[k] for k in ("N", "naive_max_deviation", "reference_residual",
                                 "reference_vs_multiprecision")}
    return metrics, ["j", "re", "im", "ref_re", "ref_im"], _complex_rows(r["naive"], r["reference"][col])


def cmd_diag_vs_qz(a):
    p = WaveProblem(sigma=a.sigma, T=a.T, N_x=a.nx, N_t=a.nt, L=a.L)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sd = solve_wave(p, "diag", cap=a.diag_cap)
    sq = solve_wave(p, "qz")
    xs, ts = _grid(p.domain, p.T, a.grid_x, a.grid_t)
    rows = []
    for t in ts:
        for x, ud, uq in zip(xs, sd(xs, t), sq(xs, t)):
            rows.append([x, t, ud, uq])
    diff = float(max(abs(r[2] - r[3]) for r in rows))
    cE = sd.diagnostics[0]["cond2_E"]
    return {"max_difference": diff, "cond2_E": cE}, ["x", "t", "u_diag", "u_qz"], rows


COMMANDS = {
    "gbp-zeros": cmd_gbp_zeros,
    "eig-mass": cmd_eig_mass,
    "collocation-eig": cmd_collocation_eig,
    "verify-identities": cmd_verify_identities,
    "perturbation-study": cmd_perturbation_study,
    "solve-ivp": cmd_solve_ivp,
    "solve-wave": cmd_solve_wave,
    "solve-kdv": cmd_solve_kdv,
    "conditioning": cmd_conditioning,
    "instability-demo": cmd_instability_demo,
    "diag-vs-qz": cmd_diag_vs_qz,
}


def build_parser():
    parser = _Parser(prog="spectime", description="LDPG spectral-in-time experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    subs = {}

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--json", action="store_true", help="print a JSON summary")
        p.add_argument("--out", help="CSV output path (default: stdout unless --json)")
        p.add_argument("--config", help="JSON file with option values")
        subs[name] = p
        return p

    p = add("gbp-zeros", "zeros of a generalised Bessel polynomial")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--tol", type=float, default=1e-12)

    p = add("eig-mass", "double-precision eigenvalues of an LDPG mass matrix")
    p.add_argument("--m", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--variant", choices=("pseudospectral", "spectral"), default="pseudospectral")

    p = add("collocation-eig", "eigenvalues of the Legendre collocation matrix")
    p.add_argument("--n", type=int, default=16)

    p = add("verify-identities", "exact and numerical matrix identities")
    p.add_argument("--identity", choices=("thm4.1", "prop5.1", "cor5.1", "pencil-invariance"),
                   default="thm4.1")
    p.add_argument("--n", type=_ints, default=[4, 16, 40])

    p = add("perturbation-study", "eigenvalue gap of perturbed mass matrices")
    p.add_argument("--m", type=int, choices=(2, 3), default=2)
    p.add_argument("--n", type=_ints, default=[16, 32, 64])
    p.add_argument("--dps", type=int, default=50)

    p = add("solve-ivp", "u^(m) = sigma u on (-1, 1)")
    p.add_argument("--m", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--sigma", type=float, default=-1.0)
    p.add_argument("--inits", type=_floats, default=None, help="u(-1), u'(-1), ...")
    p.add_argument("--n", type=int, default=24)
    p.add_argument("--strategy", choices=("direct", "first_order_system"), default="direct")
    p.add_argument("--variant", choices=("pseudospectral", "spectral"), default="pseudospectral")
    p.add_argument("--points", type=int, default=101)

    for name, help_ in (("solve-wave", "linear wave-type equation u_xt + sigma u = 0"),
                        ("diag-vs-qz", "diagonalisation against QZ on the wave problem")):
        p = add(name, help_)
        p.add_argument("--sigma", type=float, default=1.0)
        p.add_argument("--T", type=float, default=10.0)
        p.add_argument("--nx", type=int, default=160)
        p.add_argument("--nt", type=int, default=10)
        p.add_argument("--L", type=int, default=10)
        p.add_argument("--diag-cap", type=int, default=15)
        p.add_argument("--grid-x", type=int, default=201)
        p.add_argument("--grid-t", type=int, default=11)
        if name == "solve-wave":
            p.add_argument("--strategy", choices=("qz", "diag"), default="qz")
            p.add_argument("--domain", type=_floats, default=[-50.0, 50.0])

    p = add("solve-kdv", "KdV-type equation by space-time Newton-Krylov")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--domain", type=_floats, default=[-50.0, 50.0])
    p.add_argument("--T", type=float, default=10.0)
    p.add_argument("--nx", type=int, default=160)
    p.add_argument("--nt", type=int, default=40)
    p.add_argument("--L", type=int, default=1)
    p.add_argument("--grid-x", type=int, default=201)
    p.add_argument("--grid-t", type=int, default=11)

    p = add("conditioning", "cond2 and eigenvalue moduli of I + M_x, cond2 of E")
    p.add_argument("--nx", type=_ints, default=[20, 50, 100])
    p.add_argument("--nt", type=_ints, default=[])

    p = add("instability-demo", "naive eigenvalues of M-bar against the zero-based values")
    p.add_argument("--n", type=int, default=56)
    p.add_argument("--dps", type=int, default=50)
    return parser, subs


_PLUMBING = {"json", "out", "config", "command"}


def _load_config(subs, argv):
    """Install ``--config`` values as subcommand defaults before parsing."""
    argv = list(sys.argv[1:] if argv is None else argv)
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    command = next((t for t in argv if not t.startswith("-")), None)
    if path is None or command not in subs:
        return argv
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ValidationError("config must be a JSON object")
    sp = subs[command]
    actions = {a.dest: a for a in sp._actions}
    known = set(actions) - _PLUMBING - {"help"}
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise ValidationError(f"unknown config keys: {', '.join(unknown)}")
    for k, v in cfg.items():
        act = actions[k]
        if act.type in (_ints, _floats) and not isinstance(v, list):
            v = act.type(v)
        if act.choices is not None and v not in act.choices:
            raise ValidationError(f"invalid value for {k}: {v!r}")
        cfg[k] = v
        # flags given on the command line still override the file
        act.required = False
    sp.set_defaults(**cfg)
    return argv


def _validate(a):
    for key in ("n", "nx", "nt", "L"):
        v = getattr(a, key, None)
        if isinstance(v, int) and not isinstance(v, bool) and v < 1:
            raise ValidationError(f"--{key} must be >= 1")
        if isinstance(v, list) and any(x < 1 for x in v):
            raise ValidationError(f"--{key} values must be >= 1")
    if a.command == "solve-ivp" and a.inits is None:
        a.inits = [1.0] * a.m
    if getattr(a, "domain", None) is not None and (len(a.domain) != 2 or a.domain[0] >= a.domain[1]):
        raise ValidationError("--domain needs two increasing values")


def _params(a):
    return {k: v for k, v in vars(a).items() if k not in _PLUMBING}


def _emit_error(command, params, kind, exc, code):
    rec = {"command": command, "params": _jsonable(params or {}), "metrics": {},
           "status": "error", "error": {"kind": kind, "type": type(exc).__name__, "message": str(exc)}}
    print(json.dumps(rec))
    return code


def main(argv=None) -> int:
    parser, subs = build_parser()
    command, params = None, None
    try:
        argv = _load_config(subs, argv)
        args = parser.parse_args(argv)
        command, params = args.command, _params(args)
        _validate(args)
        params = _params(args)
        metrics, header, rows = COMMANDS[args.command](args)
    except (ValidationError, DomainError, ValueError) as exc:
        return _emit_error(command, params, "validation", exc, EXIT_VALIDATION)
    except (SpectimeError, np.linalg.LinAlgError, ArithmeticError) as exc:
        return _emit_error(command, params, "solver", exc, EXIT_SOLVER)
    buf = io.StringIO()
    write_csv(header, rows, buf)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(buf.getvalue())
    elif not args.json:
        sys.stdout.write(buf.getvalue())
    if args.json:
        rec = {"command": command, "params": _jsonable(params), "metrics": _jsonable(metrics),
               "status": "ok"}
        print(json.dumps(rec))
    return 0


if __name__ == "__main__":
    sys.exit(main())
