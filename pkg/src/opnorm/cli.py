"""``opnorm`` command line: compute, oracle, gen, verify, bench.

Reports go to stdout as JSON; diagnostics go to stderr. Exit codes: 0 ok,
1 verification failure, 2 invalid input, 3 iteration limit reached.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .boyd import DEFAULT_MAX_ITER, DEFAULT_TOL, compute_norm
from .core import INF, NormParams, as_matrix, ratio_f
from .errors import OpNormError
from .instances import (
    amplify,
    build_gadget,
    builtin_graph,
    check_dims,
    default_C,
    gadget_closed_form,
    gadget_manifest,
    lift_manifest,
    lift_to_qp,
    read_edge_list,
    weighted_manifest,
    write_instance,
)
from .io import read_matrix
from .oracle import brute_norm, interpolation_estimate, longest_vector, qp_upper_from_pp

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INVALID = 2
EXIT_MAX_ITER = 3

REPORT_KEYS = (
    "command",
    "params",
    "bounds",
    "estimate",
    "iterations",
    "converged",
    "wall_time",
    "maximizer",
    "manifest",
    "details",
)

WITNESS_RTOL = 1e-9
CONTAIN_RTOL = 1e-9


def _exponent(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity"):
        return INF
    try:
        v = float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number or 'inf'") from None
    if math.isnan(v):
        raise argparse.ArgumentTypeError("exponent is NaN")
    return v


def _json_number(v):
    if v is None:
        return None
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        raise ValueError("NaN in report")
    return v


def make_report(argv, p=None, q=None, tol=None, seed=None, bounds=None, estimate=None,
                iterations=None, converged=None, wall_time=0.0, maximizer=None,
                manifest=None, details=None) -> dict:
    """Report dict with the fixed key set ``REPORT_KEYS``."""
    return {
        "command": list(argv),
        "params": {"p": _json_number(p), "q": _json_number(q), "tol": tol, "seed": seed},
        "bounds": bounds,
        "estimate": estimate,
        "iterations": iterations,
        "converged": converged,
        "wall_time": wall_time,
        "maximizer": None if maximizer is None else [float(v) for v in maximizer],
        "manifest": manifest,
        "details": details or {},
    }


def emit(report: dict, stream=None):
    stream = stream or sys.stdout
    stream.write(json.dumps(report, indent=2, allow_nan=False) + "\n")


def _load(path):
    A = as_matrix(read_matrix(path))
    check_dims(A.shape)
    return A


def cmd_compute(args, argv):
    if math.isinf(args.p) or math.isinf(args.q):
        raise OpNormError("compute does not accept infinite exponents; use `oracle` instead")
    params = NormParams(args.p, args.q)
    if not params.iteration_ok:
        raise OpNormError(
            f"p={args.p}, q={args.q} is outside the supported range 1 < p <= q < inf for the iteration; "
            "use `oracle` for this exponent pair"
        )
    A = _load(args.input)
    t0 = time.perf_counter()
    rep = compute_norm(A, params, tol=args.tol, max_iter=args.max_iter)
    wall = time.perf_counter() - t0
    report = make_report(
        argv, args.p, args.q, args.tol, args.seed,
        bounds=rep.bounds.as_dict(),
        estimate=rep.estimate,
        iterations=rep.iterations,
        converged=rep.converged,
        wall_time=wall,
        maximizer=rep.maximizer.coords if args.emit_vector else None,
        details={
            "potential_ratio": rep.potential_ratio,
            "shifted_bounds": rep.shifted_bounds.as_dict(),
            "N": rep.positive.N,
            "shift_applied": rep.positive.shift_applied,
        },
    )
    emit(report)
    if not rep.converged:
        print(f"iteration limit {args.max_iter} reached (M/m = {rep.potential_ratio:.6g})", file=sys.stderr)
        return EXIT_MAX_ITER
    return EXIT_OK


def cmd_oracle(args, argv):
    A = _load(args.input)
    t0 = time.perf_counter()
    if args.inf_to_p:
        p, q = args.p, INF
        res = longest_vector(A.T, p)
        bounds = {"lower": res.value, "upper": res.value, "method": "oracle"}
        value, witness, details = res.value, res.witness, {"method": res.method, "exhaustive": res.exhaustive}
    elif args.baseline:
        p = q = args.p
        b = interpolation_estimate(A, p)
        bounds = b.as_dict()
        value, witness = b.lower, None
        details = {"method": "interpolation", "exhaustive": False, "ratio": b.upper / b.lower if b.lower > 0 else None}
    else:
        p = args.p
        q = args.p if args.q is None else args.q
        params = NormParams(p, q)
        res = brute_norm(A, params, restarts=args.restarts, seed=args.seed)
        value, witness = res.value, res.witness
        upper = None
        if res.exhaustive:
            upper = value
        elif q >= p and not math.isinf(p):
            # rigorous up to rounding; max() absorbs the last ulp
            upper = max(qp_upper_from_pp(A, params), value)
        bounds = {"lower": value, "upper": upper, "method": "oracle"}
        details = {"method": res.method, "exhaustive": res.exhaustive, "restarts": args.restarts}
    report = make_report(
        argv, p, q, None, args.seed,
        bounds=bounds,
        estimate=value,
        wall_time=time.perf_counter() - t0,
        maximizer=witness,
        details=details,
    )
    emit(report)
    return EXIT_OK


def _graph(args):
    if (args.builtin is None) == (args.graph is None):
        raise OpNormError("give exactly one of --builtin or --graph")
    return builtin_graph(args.builtin) if args.builtin else read_edge_list(args.graph)


def cmd_gen(args, argv):
    g = _graph(args)
    p = args.p
    C = default_C(p) if args.C is None else args.C
    gad = build_gadget(g, C, p)
    name = args.name
    if args.kind == "gadget":
        matrix, manifest = gad.matrix, gadget_manifest(gad)
        name = name or f"gadget_{g.n}_{g.degree}"
    elif args.kind == "tensor":
        inst = amplify(gad, args.k)
        # in plain p->p variables the weighting cancels: the matrix is the
        # Kronecker power of the gadget
        matrix, _ = lift_to_qp(inst, p, p)
        manifest = weighted_manifest(inst)
        name = name or f"tensor_{g.n}_{g.degree}_k{args.k}"
    else:
        if args.q is None:
            raise OpNormError("gen lift needs --q")
        inst = amplify(gad, args.k)
        matrix, _ = lift_to_qp(inst, p, args.q)
        manifest = lift_manifest(inst, p, args.q)
        name = name or f"lift_{g.n}_{g.degree}_k{args.k}_q{args.q:g}"
    manifest["seed"] = args.seed
    path = write_instance(args.out, name, matrix, manifest)
    report = make_report(
        argv, manifest["p"], manifest["q"], None, args.seed,
        estimate=manifest["expected_ratio_at_witness"],
        manifest=str(path),
        details={"kind": args.kind, "shape": list(matrix.shape), "cut_size": manifest["cut_size"]},
    )
    emit(report)
    return EXIT_OK


def _rel_close(a, b, rtol):
    return abs(a - b) <= rtol * max(abs(a), abs(b), 1.0)


def verify_manifest(path, restarts: int = 32, seed: int = 0) -> list[dict]:
    """Run the manifest checks; each entry is ``{name, passed, ...}``."""
    path = Path(path)
    doc = json.loads(path.read_text())
    A = _load(path.parent / doc["matrix"])
    p, q = float(doc["p"]), float(doc["q"])
    params = NormParams(p, q)
    e = float(doc["ratio_exponent"])
    witness = np.asarray(doc["witness"], dtype=float)
    expected = float(doc["expected_ratio_at_witness"])
    checks = []

    def add(name, passed, **info):
        clean = {k: _json_number(v) if isinstance(v, float) else v for k, v in info.items()}
        checks.append({"name": name, "passed": bool(passed), **clean})

    got = ratio_f(A, witness, params) ** e
    add("witness_ratio", np.isfinite(got) and _rel_close(got, expected, WITNESS_RTOL), got=got, expected=expected)

    if doc.get("C") is not None and doc.get("graph") is not None:
        gr = doc["graph"]
        base = gadget_closed_form(doc["C"], gr["degree"], p, doc["cut_size"], gr["n"])
        k = int(doc.get("k", 1))
        if doc["kind"] == "lift":
            alphas = np.asarray(doc["alphas"], dtype=float)
            closed = base ** (k / p) * alphas.sum() ** (1.0 / p - 1.0 / q)
        else:
            closed = base**k
        add("closed_form", _rel_close(closed, expected, WITNESS_RTOL), closed=closed, expected=expected)

    witness_norm = ratio_f(A, witness, params)
    if params.iteration_ok and np.all(A >= 0):
        rep = compute_norm(A, params)
        add("sandwich_contains_witness", rep.bounds.upper * (1 + CONTAIN_RTOL) >= witness_norm,
            lower=rep.bounds.lower, upper=rep.bounds.upper, witness_norm=witness_norm)
        value = rep.estimate
    else:
        res = brute_norm(A, params, restarts=restarts, seed=seed, starts=witness[:, None])
        value = res.value
        add("oracle_dominates_witness", value >= witness_norm * (1 - CONTAIN_RTOL),
            oracle=value, witness_norm=witness_norm)
    if q >= p and not math.isinf(q):
        upper = qp_upper_from_pp(A, params)
        add("upper_bound_contains", upper * (1 + CONTAIN_RTOL) >= value, upper=upper, value=value)
    return checks


def cmd_verify(args, argv):
    t0 = time.perf_counter()
    checks = verify_manifest(args.manifest, restarts=args.restarts, seed=args.seed)
    ok = all(c["passed"] for c in checks)
    doc = json.loads(Path(args.manifest).read_text())
    report = make_report(
        argv, doc["p"], doc["q"], None, args.seed,
        wall_time=time.perf_counter() - t0,
        manifest=str(args.manifest),
        details={"passed": ok, "checks": checks},
    )
    emit(report)
    for c in checks:
        if not c["passed"]:
            print(f"FAIL {c['name']}: " + ", ".join(f"{k}={v}" for k, v in c.items() if k not in ("name", "passed")),
                  file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


# max of iterations / iteration_bound measured by `opnorm bench` (about
# 8e-5 over sizes 2..64, dense and half-zero matrices), with headroom
ITERATION_CONSTANT = 1e-3


def iteration_bound(N, n, tol):
    """``N n (log(N n / tol))^3``: the shape of the iteration-count bound."""
    return N * n * math.log(N * n / tol) ** 3


def run_bench(sizes=(2, 4, 8, 16, 32), trials=10, seed=0, tol=DEFAULT_TOL):
    """Time :func:`compute_norm` on seeded positive matrices and record the
    smallest constant ``c`` with ``iterations <= c * iteration_bound``."""
    rng = np.random.default_rng(seed)
    rows = []
    c = 0.0
    for n in sizes:
        its, times = [], []
        for _ in range(trials):
            A = rng.uniform(0.05, 1.0, size=(n, n))
            p = float(rng.uniform(1.1, 6.0))
            q = float(rng.uniform(p, 8.0))
            t0 = time.perf_counter()
            rep = compute_norm(A, (p, q), tol=tol)
            times.append(time.perf_counter() - t0)
            its.append(rep.iterations)
            dim = max(A.shape)
            c = max(c, rep.iterations / iteration_bound(rep.positive.N, dim, tol))
        rows.append({"n": n, "max_iterations": max(its), "mean_iterations": float(np.mean(its)),
                     "mean_seconds": float(np.mean(times))})
    return {"iteration_constant": c, "sizes": rows}


def cmd_bench(args, argv):
    t0 = time.perf_counter()
    res = run_bench(tuple(args.sizes), args.trials, args.seed, args.tol)
    emit(make_report(argv, None, None, args.tol, args.seed, wall_time=time.perf_counter() - t0, details=res))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="opnorm", description="q->p operator norms with certified bounds.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("compute", help="fixed-point iteration for nonnegative matrices")
    c.add_argument("input")
    c.add_argument("--p", type=_exponent, required=True)
    c.add_argument("--q", type=_exponent, required=True)
    c.add_argument("--tol", type=float, default=DEFAULT_TOL)
    c.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    c.add_argument("--emit-vector", action="store_true")
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_compute)

    o = sub.add_parser("oracle", help="multistart ascent, sign enumeration or interpolation baseline")
    o.add_argument("input")
    o.add_argument("--p", type=_exponent, required=True)
    o.add_argument("--q", type=_exponent, default=None)
    mode = o.add_mutually_exclusive_group()
    mode.add_argument("--inf-to-p", action="store_true", help="exact inf->p norm by sign enumeration")
    mode.add_argument("--baseline", action="store_true", help="interpolation bounds for p->p")
    o.add_argument("--restarts", type=int, default=32)
    o.add_argument("--seed", type=int, default=0)
    o.set_defaults(func=cmd_oracle)

    g = sub.add_parser("gen", help="write a gadget, tensored or lifted instance")
    g.add_argument("kind", choices=("gadget", "tensor", "lift"))
    g.add_argument("--builtin", help="cycleN, completeN or hypercubeK")
    g.add_argument("--graph", help="edge-list TSV")
    g.add_argument("--C", type=float, default=None)
    g.add_argument("--p", type=float, required=True)
    g.add_argument("--q", type=float, default=None)
    g.add_argument("--k", type=int, default=None)
    g.add_argument("--out", default=".")
    g.add_argument("--name", default=None)
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("verify", help="re-check a generated manifest")
    v.add_argument("manifest")
    v.add_argument("--restarts", type=int, default=32)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="iteration counts and timings")
    b.add_argument("--sizes", type=int, nargs="+", default=[2, 4, 8, 16, 32])
    b.add_argument("--trials", type=int, default=10)
    b.add_argument("--tol", type=float, default=DEFAULT_TOL)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    if args.cmd == "gen" and args.k is None:
        args.k = 2 if args.kind == "tensor" else 1
    try:
        return args.func(args, argv)
    except (OpNormError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
