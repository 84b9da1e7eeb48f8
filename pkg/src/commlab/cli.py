"""Command-line surface: generate, measure, verify, sweep, simulate.

Exit codes: 0 success, 1 assert-relation violation, 2 usage/parse error,
3 size or budget cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import exactcomb as xc
from . import facnorm as fn
from . import hierarchy as hy
from . import lpbounds as lb
from . import matrices as mm
from . import protosim as ps

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_CAP = 3

GENERATORS = {
    "eq": lambda p: mm.gen_equality(int(p[0])),
    "hd": lambda p: mm.gen_hamming_distance(int(p[0]), int(p[1]) if len(p) > 1 else 1),
    "gt": lambda p: mm.gen_greater_than(int(p[0])),
    "sip3d": lambda p: mm.gen_sign_inner_product_3d(int(p[0])),
    "pgint": lambda p: mm.gen_projective_intervals(int(p[0])),
}


class CliError(Exception):
    def __init__(self, message, code=EXIT_USAGE):
        super().__init__(message)
        self.code = code


def load_source(spec):
    """Matrix from 'family:params' shorthand or a file path."""
    if ":" in spec and spec.split(":", 1)[0] in GENERATORS:
        family, params = spec.split(":", 1)
        try:
            return GENERATORS[family](params.split(","))
        except mm.SizeLimitError as e:
            raise CliError(str(e), EXIT_CAP) from None
        except ValueError as e:
            raise CliError(f"bad generator spec {spec!r}: {e}") from None
    try:
        return mm.load_matrix(spec)
    except FileNotFoundError:
        raise CliError(f"no such file or generator spec: {spec!r}") from None
    except mm.MatrixParseError as e:
        raise CliError(str(e)) from None


def cmd_gen(args):
    params = [p for p in (args.params or "").split(",") if p] or None
    if args.family not in GENERATORS:
        raise CliError(f"unknown family {args.family!r}")
    plist = params or []
    if args.n is not None:
        plist = [str(args.n)] + ([str(args.k)] if args.k is not None else [])
    if args.q is not None:
        plist = [str(args.q)]
    if args.m is not None:
        plist = [str(args.m)]
    if args.c is not None:
        plist = [str(args.c)]
    if not plist:
        raise CliError("generator parameters required (e.g. --n 3)")
    try:
        mat = GENERATORS[args.family](plist)
    except mm.SizeLimitError as e:
        raise CliError(str(e), EXIT_CAP) from None
    mm.save_matrix(mat, args.out)
    print(f"{mat.rows}x{mat.cols} {mat.convention} [{mat.label}] -> {args.out}")
    return EXIT_OK


def _measure_one(mat, mid, eps, budget):
    if mid == "D":
        return xc.deterministic_cc(mat.to_bool(), budget), "exact"
    if mid == "CP":
        return xc.protocol_partition_number(mat.to_bool(), budget), "exact"
    if mid == "CD":
        return xc.partition_number(mat.to_bool(), budget), "exact"
    if mid in ("C0", "C1"):
        return xc.cover_number(mat.to_bool(), int(mid[1]), budget), "exact"
    if mid == "C":
        return xc.cover_total(mat.to_bool(), budget), "exact"
    if mid == "rank":
        return xc.rank_exact(mat), "exact"
    if mid == "one_way":
        return mm.one_way_cc(mat.to_bool()), "exact"
    if mid == "vc":
        return xc.vc_dimension(mat)[0], "exact"
    if mid == "sq":
        return xc.sq_dimension_uniform(mat.to_sign()), "exact"
    if mid == "gamma2":
        return fn.gamma2(mat.to_bool()).value, "bracket"
    if mid == "gamma2_inf":
        return fn.gamma2_inf(mat.to_sign()).value, "bracket"
    if mid == "disc":
        res = lb.discrepancy(mat.to_bool())
        return res.value, res.kind
    if mid == "prt":
        return lb.partition_bound(mat.to_bool(), eps).value, "exact"
    if mid == "boolrank":
        return xc.boolean_rank(mat.to_bool(), budget), "exact"
    raise CliError(f"unknown measure id {mid!r}")


def cmd_measure(args):
    mat = load_source(args.source)
    budget = xc.SearchBudget()
    results = {}
    for mid in args.measures.split(","):
        mid = mid.strip()
        try:
            val, kind = _measure_one(mat, mid, args.eps, budget)
        except (xc.BudgetExceededError, fn.Gamma2Error) as e:
            raise CliError(f"{mid}: {e}", EXIT_CAP) from None
        results[mid] = {"value": val, "kind": kind}
    if args.format == "json":
        print(json.dumps({"matrix": mat.label or args.source, "measures": results}, default=float))
    else:
        for mid, rec in results.items():
            print(f"{mid} = {rec['value']} [{rec['kind']}]")
    return EXIT_OK


def cmd_verify(args):
    if args.random:
        rng = np.random.default_rng(args.seed)
        worst = EXIT_OK
        for i in range(args.random):
            data = (rng.random((args.size, args.size)) < 0.5).astype(np.int8)
            mat = mm.CommMatrix(data, mm.BOOL, f"random:{args.seed}:{i}")
            code = _verify_one(mat, args)
            worst = max(worst, code)
        return worst
    mat = load_source(args.source)
    return _verify_one(mat, args)


def _verify_one(mat, args):
    rep = hy.verify_all(mat, eps=args.eps)
    doc = rep.to_json_dict()
    hy.validate_report_json(doc)
    if args.format == "json":
        print(json.dumps(doc))
    else:
        for rel in rep.relations:
            if rel.outcome == "skipped":
                continue
            mark = "ok " if rel.outcome == "holds" else "VIOLATION"
            margin = "" if rel.margin is None else f" margin={rel.margin:+.3e}"
            print(f"[{mark}] {rel.id}{margin}")
    return EXIT_VIOLATION if rep.violations else EXIT_OK


def cmd_sweep(args):
    lo, hi = args.n.split("..") if ".." in args.n else (args.n, args.n)
    ns = list(range(int(lo), int(hi) + 1))
    rows, fits = hy.sweep(args.family, ns, args.measure.split(","), eps=args.eps, fit=args.fit)
    csv = hy.sweep_csv(rows)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(csv)
        print(f"wrote {len(rows)} rows -> {args.csv}")
    else:
        sys.stdout.write(csv)
    for mid, f in fits.items():
        print(f"fit {mid}: value ~ {f['coeff']:.3g} * n^{f['exponent']:.3f} (rms {f['rms_residual']:.3g})")
    return EXIT_OK


def cmd_simulate(args):
    cfg = ps.TrialConfig(trials=args.trials, seed=args.seed, epsilon=args.epsilon)
    if args.protocol == "hd1":
        if args.d is None:
            raise CliError("--d required for the hd1 protocol")
        x = np.zeros(args.n, dtype=np.uint8)
        y = x.copy()
        y[: args.d] ^= 1
        st = ps.hd1_round_event(x, y, cfg.epsilon, cfg.trials, cfg.seed)
        out = {"protocol": "hd1", "n": args.n, "d": args.d, "seed": cfg.seed, "round_event": st.to_record()}
        print(json.dumps(out))
        return EXIT_OK
    if args.protocol == "eq1bit":
        p = ps.acceptance_matrix("eq1bit", args.n, cfg)
        off = p[~np.eye(p.shape[0], dtype=bool)]
        out = {
            "protocol": "eq1bit",
            "n": args.n,
            "seed": cfg.seed,
            "diag_min": float(np.diag(p).min()),
            "offdiag_mean": float(off.mean()),
        }
        print(json.dumps(out))
        return EXIT_OK
    if args.protocol == "ip-oblivious":
        u = np.array([1.0, 0.0])
        v = np.array([1.0, 0.0]) if args.d in (None, 0) else np.array([-1.0, 0.0])
        res = ps.oblivious_ip_protocol(u, v, gamma=1.0, trials=args.trials, seed=args.seed)
        res["seed"] = args.seed
        print(json.dumps(res, default=float))
        return EXIT_OK
    raise CliError(f"unknown protocol {args.protocol!r}")


def build_parser():
    ap = argparse.ArgumentParser(prog="commlab", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a generator instance to a matrix file")
    g.add_argument("family", choices=sorted(GENERATORS))
    g.add_argument("--params", help="comma-separated generator parameters")
    g.add_argument("--n", type=int)
    g.add_argument("--k", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--q", type=int)
    g.add_argument("--c", type=int)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    me = sub.add_parser("measure", help="compute measures for a matrix")
    me.add_argument("source", help="file path or family:params")
    me.add_argument("--measures", required=True)
    me.add_argument("--eps", type=float, default=1.0 / 3.0)
    me.add_argument("--format", choices=("text", "json"), default="text")
    me.set_defaults(func=cmd_measure)

    ve = sub.add_parser("verify", help="run the relation registry against a matrix")
    ve.add_argument("source", nargs="?", help="file path or family:params")
    ve.add_argument("--random", type=int, help="instead: verify N seeded random matrices")
    ve.add_argument("--size", type=int, default=4)
    ve.add_argument("--seed", type=int, default=7)
    ve.add_argument("--eps", type=float, default=1.0 / 3.0)
    ve.add_argument("--format", choices=("text", "json"), default="text")
    ve.set_defaults(func=cmd_verify)

    sw = sub.add_parser("sweep", help="measure a generator family across sizes")
    sw.add_argument("--family", required=True, choices=hy.SWEEP_FAMILIES)
    sw.add_argument("--n", required=True, help="range like 2..6")
    sw.add_argument("--measure", required=True)
    sw.add_argument("--eps", type=float, default=1.0 / 3.0)
    sw.add_argument("--csv")
    sw.add_argument("--fit", action="store_true")
    sw.set_defaults(func=cmd_sweep)

    si = sub.add_parser("simulate", help="Monte Carlo protocol simulation")
    si.add_argument("--protocol", required=True, choices=("hd1", "eq1bit", "ip-oblivious"))
    si.add_argument("--n", type=int, default=16)
    si.add_argument("--d", type=int)
    si.add_argument("--trials", type=int, default=100000)
    si.add_argument("--seed", type=int, default=1)
    si.add_argument("--epsilon", type=float, default=1e-3)
    si.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else 0
    try:
        if args.command == "verify" and not args.source and not args.random:
            raise CliError("verify needs a source or --random")
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except (xc.BudgetExceededError, mm.SizeLimitError) as e:
        print(f"cap exceeded: {e}", file=sys.stderr)
        return EXIT_CAP
    except mm.MatrixParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
