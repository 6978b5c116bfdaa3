"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 input error, 4 convergence failure.
"""
import argparse
import csv
import json
import math
import sys

import numpy as np

from . import capacity as cap
from . import dual, riccati
from .exceptions import ConvergenceError, DomainError, ParameterError
from .kramer import KramerParams
from .maxcorr import GaussianJoint, demo_triple, greedy_gap_demo, maximal_correlation_estimate
from .simulation import run_campaign

SCHEMA_VERSION = "1.0"
EXIT_USAGE, EXIT_INPUT, EXIT_CONVERGENCE = 2, 3, 4
LN2 = math.log(2.0)

OUTPUT_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "command", "params", "results"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"enum": ["capacity", "sweep", "dual", "riccati", "simulate", "maxcorr"]},
        "params": {"type": "object"},
        "results": {"type": "object"},
    },
}


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


def _clean(obj):
    """Make a payload JSON-safe: numpy scalars to Python, non-finite floats
    to strings."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def record(command, params, results):
    return {"schema_version": SCHEMA_VERSION, "command": command,
            "params": _clean(params), "results": _clean(results)}


def _emit(rec, as_json, out):
    if as_json:
        out.write(json.dumps(rec, indent=2) + "\n")
        return
    out.write(f"# {rec['command']}\n")
    for section in ("params", "results"):
        for k, v in rec[section].items():
            out.write(f"{k:>28}: {v}\n")


def _unit(bits):
    return (1.0 / LN2, "bits") if bits else (1.0, "nats")


def _check_senders(n):
    if n < 2:
        raise UsageError("--senders must be >= 2")


def cmd_capacity(args):
    _check_senders(args.senders)
    if args.power < 0:
        raise UsageError("--power must be nonnegative")
    scale, unit = _unit(args.bits)
    pt = cap.linear_feedback_sum_capacity(args.senders, args.power, args.tol)
    n, p = args.senders, args.power
    results = {
        "unit": unit,
        "phi": pt.phi,
        "rho": pt.rho,
        "C_L": pt.sum_capacity * scale,
        "C_nofb": float(cap.nofeedback_sum_capacity(n, p)) * scale,
        "C_coop": float(cap.cooperation_sum_capacity(n, p)) * scale,
        "P_c": cap.kramer_threshold(n, args.tol),
    }
    return record("capacity", {"senders": n, "power": p, "tol": args.tol}, results)


SWEEP_HEADER = ["P", "phi", "C_L", "C_nofb", "C_coop", "low_gap", "high_gap"]


def sweep_rows(n, powers, scale=1.0, tol=cap.DEFAULT_TOL):
    rows = []
    for p in powers:
        pt = cap.linear_feedback_sum_capacity(n, p, tol)
        nofb = float(cap.nofeedback_sum_capacity(n, p))
        coop = float(cap.cooperation_sum_capacity(n, p))
        cl = pt.sum_capacity
        rows.append([p, pt.phi, cl * scale, nofb * scale, coop * scale,
                     (cl - nofb) * scale, (cl - coop) * scale])
    return rows


def cmd_sweep(args):
    _check_senders(args.senders)
    lo, hi, k = args.power_min, args.power_max, args.points
    if k < 1:
        raise UsageError("--points must be >= 1")
    if lo < 0 or hi < lo or (hi == lo and k > 1):
        raise UsageError("need 0 <= --power-min <= --power-max (strict when --points > 1)")
    if args.log_grid:
        if lo <= 0:
            raise UsageError("--log-grid needs --power-min > 0")
        powers = [lo] if k == 1 else np.geomspace(lo, hi, k).tolist()
    else:
        powers = [lo] if k == 1 else np.linspace(lo, hi, k).tolist()
    scale, unit = _unit(args.bits)
    rows = sweep_rows(args.senders, powers, scale, args.tol)
    params = {"senders": args.senders, "power_min": lo, "power_max": hi, "points": k,
              "log_grid": args.log_grid}
    return record("sweep", params, {"unit": unit, "header": SWEEP_HEADER, "rows": rows})


def write_csv(rows, out):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for row in rows:
        w.writerow([repr(float(v)) for v in row])


def cmd_dual(args):
    _check_senders(args.senders)
    n, p = args.senders, args.power
    if p <= 0:
        raise UsageError("--power must be positive")
    if (args.gamma is not None and args.gamma < 0) or (args.lam is not None and args.lam < 0):
        raise UsageError("multipliers must be nonnegative")
    g_star = dual.gamma_star(n, p)
    gam = g_star if args.gamma is None else args.gamma
    l_star = dual.lambda_star(n, p, gam) if gam > 0 else math.nan
    lam = args.lam if args.lam is not None else l_star
    if math.isnan(lam):
        raise UsageError("--lambda is required when --gamma is 0")
    ev = dual.dual_bound(lam, gam, n, p, grid=args.grid)
    cl = cap.linear_feedback_sum_capacity(n, p).sum_capacity
    if ev.unbounded:
        db_gap = math.nan
    else:
        K = cap.SymmetricCovariance(ev.x_star, ev.phi_at_x, n).matrix()
        db_gap = dual.dependence_balance_gap(K)
    results = {
        "J": ev.j_value,
        "C_L": cl,
        "gap": ev.j_value - cl,
        "gamma": gam,
        "lambda": lam,
        "gamma_star": g_star,
        "lambda_star": dual.lambda_star(n, p, g_star),
        "x_star": ev.x_star,
        "phi_at_x": ev.phi_at_x,
        "dependence_balance_gap": db_gap,
    }
    return record("dual", {"senders": n, "power": p, "grid": args.grid}, results)


def cmd_riccati(args):
    _check_senders(args.senders)
    n, beta = args.senders, args.beta
    if beta <= 1:
        raise UsageError("--beta must exceed 1")
    sol = riccati.solve_dare_circulant(n, beta)
    kjj = riccati.diagonal_power(sol)
    lam1 = sol.eigenvalues[0]
    results = {
        "eigenvalues": list(sol.eigenvalues),
        "K_jj": kjj,
        "dare_residual": sol.residual,
        "lambeq_defect": riccati.lambeq_defect(sol),
        "diag_identity_defect": abs(1 + lam1 * (n - lam1 / kjj[0]) - beta ** (2 * (n - 1))),
        "sum_rate_nats": n * math.log(beta),
    }
    if args.iterative:
        gain = riccati.symmetric_gain(n, beta)
        runs = [riccati.solve_dare_iterative(gain, k0, tol=args.tol, max_iters=args.max_iters)
                for k0 in (np.eye(n), 10.0 * np.eye(n))]
        results["iterative_iterations"] = [r.iterations for r in runs]
        results["iterative_max_deviation"] = max(
            float(np.max(np.abs(r.k_star - sol.k_star))) for r in runs)
    return record("riccati", {"senders": n, "beta": beta, "iterative": args.iterative,
                              "tol": args.tol}, results)


def cmd_simulate(args):
    _check_senders(args.senders)
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    if args.beta <= 1:
        raise UsageError("--beta must exceed 1")
    if args.blocklength < 1:
        raise UsageError("--blocklength must be >= 1")
    if args.power <= 0:
        raise UsageError("--power must be positive")
    try:
        params = KramerParams(args.senders, args.beta, args.rate, args.blocklength,
                              power_budget=args.power)
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc
    rep = run_campaign(params, args.trials, args.seed)
    results = rep.as_dict()
    for key in ("params", "trials", "seed"):
        results.pop(key, None)
    results["rate_below_log2_beta"] = params.rate_per_sender < math.log2(args.beta)
    results["power_ok"] = all(k < args.power for k in rep.k_star_diag)
    results["warnings"] = [] if results["power_ok"] else [
        "K*_jj >= power budget: the code violates the power constraint asymptotically"]
    return record("simulate", params.as_dict() | {"trials": args.trials, "seed": args.seed},
                  results)


def read_covariance(path):
    """First line ``N``, then N lines of N whitespace-separated reals."""
    try:
        with open(path) as fh:
            lines = [ln.split() for ln in fh if ln.strip()]
        n = int(lines[0][0])
        if len(lines[0]) != 1 or n < 2 or len(lines) != n + 1:
            raise ValueError("bad header or row count")
        K = np.array([[float(t) for t in row] for row in lines[1:]])
        if K.shape != (n, n):
            raise ValueError("rows must have N entries")
    except (OSError, ValueError, IndexError) as exc:
        raise InputError(f"cannot read covariance file {path}: {exc}") from exc
    try:
        return GaussianJoint(K)
    except DomainError as exc:
        raise InputError(str(exc)) from exc


def cmd_maxcorr(args):
    if args.degree < 1 or args.samples < 4:
        raise UsageError("--degree must be >= 1 and --samples >= 4")
    params = {"degree": args.degree, "samples": args.samples, "seed": args.seed}
    if args.greedy_steps is not None:
        if args.greedy_steps < 0:
            raise UsageError("--greedy-steps must be nonnegative")
        rep = greedy_gap_demo(tuple(args.powers), args.greedy_steps, args.seed,
                              args.degree, args.samples)
        params |= {"greedy_steps": args.greedy_steps, "powers": args.powers}
    else:
        if args.covariance:
            joint = read_covariance(args.covariance)
            params["covariance"] = args.covariance
        else:
            joint = demo_triple()
            params["demo_triple"] = True
        rep = maximal_correlation_estimate(joint, args.degree, args.samples, args.seed)
    return record("maxcorr", params, rep.as_dict())


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser():
    p = _Parser(prog="fbmac", description="Gaussian MAC with feedback: linear-feedback "
                "sum-capacity, dual bound, Riccati steady state, Kramer code simulation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, tol=True):
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        if tol:
            sp.add_argument("--tol", type=float, default=cap.DEFAULT_TOL)

    sp = sub.add_parser("capacity", help="phi(N,P) and C_L(N,P)")
    sp.add_argument("--senders", type=int, required=True)
    sp.add_argument("--power", type=float, required=True)
    sp.add_argument("--bits", action="store_true")
    common(sp)

    sp = sub.add_parser("sweep", help="CSV of C_L over a power grid")
    sp.add_argument("--senders", type=int, required=True)
    sp.add_argument("--power-min", type=float, required=True)
    sp.add_argument("--power-max", type=float, required=True)
    sp.add_argument("--points", type=int, default=50)
    grid = sp.add_mutually_exclusive_group()
    grid.add_argument("--log-grid", dest="log_grid", action="store_true", default=True)
    grid.add_argument("--linear-grid", dest="log_grid", action="store_false")
    sp.add_argument("--bits", action="store_true")
    common(sp)

    sp = sub.add_parser("dual", help="Lagrange dual bound J(lambda, gamma)")
    sp.add_argument("--senders", type=int, required=True)
    sp.add_argument("--power", type=float, required=True)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--lambda", dest="lam", type=float)
    sp.add_argument("--grid", type=int, default=200)
    common(sp, tol=False)

    sp = sub.add_parser("riccati", help="DARE steady state for the symmetric code")
    sp.add_argument("--senders", type=int, required=True)
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--iterative", action="store_true")
    sp.add_argument("--max-iters", type=int, default=1_000_000)
    common(sp)

    sp = sub.add_parser("simulate", help="Monte Carlo run of Kramer's code")
    sp.add_argument("--senders", type=int, required=True)
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--rate", type=float, required=True,
                    help="bits per real channel use per sender (2nR bits per codeword)")
    sp.add_argument("--blocklength", type=int, required=True, help="complex channel uses")
    sp.add_argument("--trials", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--power", type=float, default=1.0)
    common(sp, tol=False)

    sp = sub.add_parser("maxcorr", help="conditional maximal correlation demo")
    src = sp.add_mutually_exclusive_group()
    src.add_argument("--covariance", help="matrix file: N, then N rows (V1, V2, Y...)")
    src.add_argument("--demo-triple", action="store_true")
    src.add_argument("--greedy-steps", type=int, help="run the greedy demo after H steps")
    sp.add_argument("--powers", type=float, nargs=2, default=[1.0, 1.0])
    sp.add_argument("--degree", type=int, default=3)
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    common(sp, tol=False)
    return p


COMMANDS = {"capacity": cmd_capacity, "sweep": cmd_sweep, "dual": cmd_dual,
            "riccati": cmd_riccati, "simulate": cmd_simulate, "maxcorr": cmd_maxcorr}


def main(argv=None, out=None):
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        rec = COMMANDS[args.command](args)
        if args.command == "sweep" and not args.json:
            write_csv(rec["results"]["rows"], out)
        else:
            _emit(rec, args.json, out)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, DomainError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as exc:
        print(f"convergence failure: {exc} (last residual {exc.residual})", file=sys.stderr)
        return EXIT_CONVERGENCE
    return 0


if __name__ == "__main__":
    sys.exit(main())
