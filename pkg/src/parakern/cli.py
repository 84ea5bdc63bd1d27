"""Batch command-line interface.

Subcommands: ``expand`` (coefficient tables), ``eval`` (kernel values,
gradients and residuals to CSV), ``solve`` (problem representations to
CSV/JSON) and ``validate`` (oracle suite with a machine-readable report).

Exit codes: 0 success, 2 problem-file validation failure, 3 numeric
failure (including failed validation checks).  All behavior is driven by
explicit flags; no environment variables are consulted.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import __version__
from .errors import ParakernError, SchemaError
from .kernel import KernelField, eval_kernel, residual
from .oracle import exact_const_drift_kernel, quad_ray
from .polyalg import PolyEntry, taylorize
from .problemfile import ProblemFile, load_problem_file
from .recursion import (WarpParams, expand, expansion_from_dict,
                        expansion_to_dict, mode_ray_weight, pk_gamma,
                        ray_integrate)
from .solvers import (QuadratureConfig, burgers_demo, lattice, solve_cauchy,
                      solve_ibvp2)

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_NUMERIC = 3


def _parse_center(text: str | None, dim: int) -> np.ndarray:
    if not text:
        return np.zeros(dim)
    vals = [float(v) for v in text.split(",")]
    if len(vals) != dim:
        raise SchemaError(f"--center needs {dim} comma-separated values")
    return np.array(vals)


def _apply_overrides(pf: ProblemFile, args) -> ProblemFile:
    order = args.order if args.order is not None else pf.order_K
    degree = args.degree if args.degree is not None else pf.degree_D
    warp = pf.warp
    if args.mode:
        if args.mode == "plain":
            warp = WarpParams()
        elif args.c_target is not None and args.mode == "tau":
            from .recursion import warp_schedule
            warp = warp_schedule(pf.ps.horizon, args.c_target).params
        else:
            beta = args.beta if args.beta is not None else \
                (warp.beta if warp.mode == args.mode else 1.0)
            warp = WarpParams(mode=args.mode, beta=beta)
    elif args.beta is not None:
        if warp.mode == "plain":
            raise SchemaError("--beta requires --mode beta or --mode tau")
        warp = WarpParams(mode=warp.mode, beta=args.beta,
                          tau_max=warp.tau_max)
    quad = QuadratureConfig(
        gh_order=args.gh_order or pf.quad.gh_order,
        gl_order=args.gl_order or pf.quad.gl_order,
        steps=args.steps or pf.quad.steps)
    return ProblemFile(pf.pc, pf.ps, order, degree, warp, quad, pf.raw)


# ---------------------------------------------------------------------------
# expand
# ---------------------------------------------------------------------------

def cmd_expand(args) -> int:
    pf = _apply_overrides(load_problem_file(args.file), args)
    y = _parse_center(args.center, pf.pc.n)
    exp = expand(pf.pc, y, pf.order_K, pf.warp, pf.degree_D)
    payload = expansion_to_dict(exp)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(payload, fh, indent=1)
    else:
        json.dump(payload, sys.stdout, indent=1)
        print()
    diag = exp.diagnostics
    print(f"# expansion mode={exp.warp.mode} beta={exp.warp.beta:.6g} "
          f"K={exp.order_K} D={exp.degree_D} center={list(exp.center)}")
    print(f"# diagnostics at tau_ref={diag.tau_ref}")
    print(f"{'k':>3s} {'c_k_up':>24s} {'c_k_up*tau^k':>24s}")
    for k, (s, w) in enumerate(zip(diag.sup_norms, diag.weighted)):
        print(f"{k:3d} {s:24.15e} {w:24.15e}")
    if diag.truncated:
        print("# note: degree-cap truncation occurred "
              "(inherent for non-polynomial drift)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

def _read_points(path: str, dim: int) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#") or row[0].startswith("x"):
                continue
            rows.append([float(v) for v in row[:dim]])
    if not rows:
        raise SchemaError(f"no points found in {path}")
    return np.array(rows)


def cmd_eval(args) -> int:
    pf = _apply_overrides(load_problem_file(args.file), args)
    y = _parse_center(args.center, pf.pc.n)
    exp = expand(pf.pc, y, pf.order_K, pf.warp, pf.degree_D)
    if args.points:
        pts = _read_points(args.points, pf.pc.n)
    else:
        pts = lattice(pf.ps, 11)
    times = [float(v) for v in args.t.split(",")] if args.t else [0.1]
    out = sys.stdout if not args.out else open(args.out, "w", newline="")
    try:
        writer = csv.writer(out)
        header = (["t"] + [f"x{i+1}" for i in range(pf.pc.n)] + ["component",
                  "value", "log_value"]
                  + [f"grad{i+1}" for i in range(pf.pc.n)]
                  + ["residual_rel"])
        writer.writerow(header)
        for t in times:
            for x in pts:
                _, rel = residual(exp, pf.pc, t, x)
                for j in range(pf.pc.components):
                    kv = eval_kernel(exp, t, x, j=j)
                    writer.writerow(
                        [repr(float(t))] + [repr(float(v)) for v in x]
                        + [j, repr(kv.value), repr(kv.log_value)]
                        + [repr(float(g)) for g in kv.gradient]
                        + [repr(float(rel[j]))])
    finally:
        if args.out:
            out.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

def cmd_solve(args) -> int:
    pf = _apply_overrides(load_problem_file(args.file), args)
    base = args.out or "solution"
    fld = KernelField(pf.pc, pf.warp, pf.order_K, pf.degree_D)
    points = lattice(pf.ps, 41 if pf.pc.n == 1 else 9)
    if pf.ps.kind == "cauchy":
        sol = solve_cauchy(pf.ps, fld, pf.quad, points=points,
                           threads=args.threads)
    elif pf.ps.kind == "ibvp2":
        sol, dens = solve_ibvp2(pf.ps, fld, pf.quad.steps, pf.quad)
        dens.to_csv(f"{base}_density.csv")
    else:
        sol = burgers_demo(pf.ps, pf.order_K, pf.quad, points=points)
    sol.to_csv(f"{base}.csv")
    sol.to_json(f"{base}.json")
    print(f"wrote {base}.csv and {base}.json"
          + (f" and {base}_density.csv" if pf.ps.kind == "ibvp2" else ""))
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def _check(name, deviation, tol):
    return {"name": name, "max_deviation": float(deviation),
            "tolerance": float(tol),
            "status": "PASS" if deviation <= tol else "FAIL"}


def _ray_weight_checks(fault: str | None, tol: float = 1e-13):
    """Adjudicate the closed-form ray weights against adaptive quadrature.

    The s-exponent conventions (plain k, scaled k/beta, warped
    (1-tau)k/beta) each produce a diagonal weight 1/(a + |gamma|); every
    one is compared with quad_ray on the monomial of matching order.
    """
    beta, tau = 0.1, 0.5
    tol = min(tol, 1e-13)
    results = []
    for name, wp, tau_used in (
            ("ray_weight_E2_plain", WarpParams(), 0.0),
            ("ray_weight_jbk_beta", WarpParams(mode="beta", beta=beta), 0.0),
            ("ray_weight_E4", WarpParams(mode="tau", beta=beta, tau_max=0.9),
             tau)):
        worst = 0.0
        for k in range(1, 9):
            for go in range(0, 9):
                closed = mode_ray_weight(go, k, wp, tau_used)
                if fault == name:
                    closed *= 1.0 + 1e-6
                a = {"plain": float(k), "beta": k / beta,
                     "tau": (1 - tau_used) * k / beta}[wp.mode]
                ref = quad_ray(lambda s, go=go: s ** go, a, tol=tol)
                worst = max(worst, abs(closed - ref))
        results.append(_check(name, worst, 1e-12))
    return results


def _pk_gamma_check():
    worst = 0.0
    for y0 in (0.0, 0.7):
        for g in range(0, 9):
            for k in range(1, 9):
                closed = pk_gamma((g,), k, [y0], cap=g)
                mono = PolyEntry(1, ((1.0, (g,)),))
                recentered = taylorize(mono, [y0], g).poly
                diag = ray_integrate(recentered, float(k))
                worst = max(worst,
                            float(np.max(np.abs(closed.coeffs - diag.coeffs))))
    return _check("pk_gamma_diagonal", worst, 1e-12)


def _roundtrip_check(pf: ProblemFile):
    y = np.zeros(pf.pc.n)
    exp = expand(pf.pc, y, min(pf.order_K, 4), pf.warp, pf.degree_D)
    clone = expansion_from_dict(
        json.loads(json.dumps(expansion_to_dict(exp))))
    worst = 0.0
    rng = np.random.default_rng(7)
    for _ in range(20):
        x = rng.uniform(-0.5, 0.5, pf.pc.n)
        t = rng.uniform(0.05, 0.2)
        for j in range(pf.pc.components):
            v1 = eval_kernel(exp, t, x, j=j).log_value
            v2 = eval_kernel(clone, t, x, j=j).log_value
            if v1 != v2:
                worst = max(worst, abs(v1 - v2))
    return _check("roundtrip_serialization", worst, 0.0)


def _const_drift_check(pf: ProblemFile):
    entry = pf.pc.drift.get((0, 0, 0))
    parts = dict(entry.parts)
    b0 = parts[0].terms[0][0] if 0 in parts else 0.0
    b1 = parts[1].terms[0][0] if 1 in parts else 0.0
    exp = expand(pf.pc, [0.0], max(pf.order_K, 2), WarpParams(), pf.degree_D)
    worst = 0.0
    for t in (0.1, 0.5, 1.0):
        for x in np.linspace(-1, 1, 9):
            kv = eval_kernel(exp, t, [x])
            ref = exact_const_drift_kernel(b0, b1, t, x, 0.0)
            worst = max(worst, abs(kv.value / ref - 1.0))
    tail = max((exp.coeffs[0][k].max_abs()
                for k in range(4, exp.order_K + 1)), default=0.0)
    return [_check("const_drift_kernel", worst, 1e-10),
            _check("const_drift_termination", tail, 1e-14)]


def _is_const_drift(pf: ProblemFile) -> bool:
    if pf.pc.n != 1 or pf.pc.components != 1 or not pf.pc.drift:
        return False
    entry = pf.pc.drift.get((0, 0, 0))
    if entry is None:
        return False
    return all(isinstance(p, PolyEntry)
               and all(sum(e) == 0 for _, e in p.terms)
               for _, p in entry.parts)


def _zero_drift_check(pf: ProblemFile):
    exp = expand(pf.pc, np.zeros(pf.pc.n), pf.order_K, WarpParams(),
                 pf.degree_D)
    worst = max(c.max_abs() for cj in exp.coeffs for c in cj)
    return _check("zero_drift_trivial", worst, 0.0)


def _normalization_check_entry(pf: ProblemFile):
    from .kernel import normalization_check
    fld = KernelField(pf.pc, WarpParams(), min(pf.order_K, 6), pf.degree_D)
    t = min(0.1, pf.ps.horizon)
    val = normalization_check(fld, t, np.zeros(pf.pc.n), 40)
    return _check("normalization_gh40", abs(val - 1.0), 1e-4)


def _beta_equivalence_check(pf: ProblemFile):
    beta = 0.5
    y = np.zeros(pf.pc.n)
    K = min(pf.order_K, 8)
    plain = expand(pf.pc, y, K, WarpParams(), pf.degree_D)
    bexp = expand(pf.pc, y, K, WarpParams(mode="beta", beta=beta), pf.degree_D)
    worst = 0.0
    for t in (0.05, 0.1, 0.2):
        for x in np.linspace(-0.4, 0.4, 5):
            xv = np.full(pf.pc.n, x)
            v1 = eval_kernel(plain, t, xv).log_value
            v2 = eval_kernel(bexp, t / beta, xv).log_value
            worst = max(worst, abs(math.exp(v2 - v1) - 1.0))
    return _check("mode_equivalence_beta", worst, 1e-10)


def cmd_validate(args) -> int:
    pf = _apply_overrides(load_problem_file(args.file), args)
    checks = []
    checks.extend(_ray_weight_checks(args.inject_fault, args.tol))
    checks.append(_pk_gamma_check())
    checks.append(_roundtrip_check(pf))
    if pf.pc.drift or pf.pc.potential:
        checks.append(_check("coefficient_bounds",
                             pf.pc.spot_check_bounds(), 1.0 + 1e-12))
    if pf.pc.is_zero_drift() and not pf.pc.potential:
        checks.append(_zero_drift_check(pf))
    elif _is_const_drift(pf):
        checks.extend(_const_drift_check(pf))
    if pf.pc.components == 1 and not pf.pc.potential:
        checks.append(_normalization_check_entry(pf))
        if not pf.pc.is_zero_drift() and not pf.pc.time_dependent:
            checks.append(_beta_equivalence_check(pf))
    status = "PASS" if all(c["status"] == "PASS" for c in checks) else "FAIL"
    report = {"file": args.file, "status": status, "checks": checks}
    text = json.dumps(report, indent=1)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK if status == "PASS" else EXIT_NUMERIC


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser):
    p.add_argument("file", help="problem JSON file")
    p.add_argument("--order", type=int, help="expansion order K")
    p.add_argument("--degree", type=int, help="polynomial degree cap D")
    p.add_argument("--mode", choices=["plain", "beta", "tau"])
    p.add_argument("--beta", type=float, help="warp parameter")
    p.add_argument("--c-target", dest="c_target", type=float,
                   help="convergence constant for tau scheduling")
    p.add_argument("--gh-order", dest="gh_order", type=int)
    p.add_argument("--gl-order", dest="gl_order", type=int)
    p.add_argument("--steps", type=int, help="ibvp2 marching steps")
    p.add_argument("--tol", type=float, default=1e-12,
                   help="tolerance for adaptive quadratures")
    p.add_argument("--threads", type=int, default=1,
                   help="worker cap for batch evaluation")
    p.add_argument("--out", help="output path (or base path for solve)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="parakern",
        description="analytic kernel expansions for drift-coupled "
                    "parabolic problems")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expand", help="compute expansion coefficients")
    _add_common(p)
    p.add_argument("--center", help="expansion center, comma separated")

    p = sub.add_parser("eval", help="evaluate kernel values to CSV")
    _add_common(p)
    p.add_argument("--center", help="expansion center, comma separated")
    p.add_argument("--points", help="CSV of evaluation points")
    p.add_argument("--t", help="comma-separated evaluation times")

    p = sub.add_parser("solve", help="run the problem's representation")
    _add_common(p)

    p = sub.add_parser("validate", help="run the oracle validation suite")
    _add_common(p)
    p.add_argument("--inject-fault", dest="inject_fault",
                   help="test fixture: corrupt a named check")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"expand": cmd_expand, "eval": cmd_eval,
                "solve": cmd_solve, "validate": cmd_validate}
    try:
        return handlers[args.command](args)
    except SchemaError as exc:
        print(f"problem-file error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except ParakernError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
