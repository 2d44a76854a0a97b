"""Command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 usage error,
3 dense budget exceeded, 4 numerical rank ambiguity.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Optional, Sequence

from .errors import BudgetExceededError, RankAmbiguityError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET, EXIT_RANK = 0, 1, 2, 3, 4

GRAM_COLUMNS = ["N", "q", "k", "mu_re", "n", "norm", "inv_norm", "cond", "margin"]
SWEEP_COLUMNS = ["N", "q", "margin", "sup_norm", "sup_inv_norm", "pass"]
COEFF_COLUMNS = ["m", "l", "p", "i", "phi_re", "phi_im"]
PROBE_COLUMNS = ["k", "kp", "n", "i", "j", "ip", "jp", "abs_inner"]


class UsageError(Exception):
    pass


def _scalar(args: argparse.Namespace):
    from .qnumerics import ScalarContext

    if (args.N is None) == (args.q is None):
        raise UsageError("exactly one of --N and --q is required")
    if args.N is not None:
        if args.N < 3:
            raise UsageError("--N must be at least 3")
        return ScalarContext.from_N(args.N)
    if not 0 < args.q < 1:
        raise UsageError("--q must lie in (0, 1)")
    return ScalarContext.from_q(args.q)


def _require_N(args: argparse.Namespace) -> int:
    ctx = _scalar(args)
    if ctx.N_opt is None:
        raise UsageError("this subcommand realizes matrices and needs an integer --N")
    return ctx.N_opt


def _fmt(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return x


def _csv(columns: Sequence[str], rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def _json(obj) -> str:
    def clean(o):
        if isinstance(o, float) and not math.isfinite(o):
            return str(o)
        if isinstance(o, dict):
            return {k: clean(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [clean(v) for v in o]
        return o

    return json.dumps(clean(obj), indent=2, sort_keys=True) + "\n"


def _emit(args: argparse.Namespace, text: str) -> None:
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_tols(items) -> dict[str, float]:
    out = {}
    for item in items or ():
        name, sep, val = item.partition("=")
        try:
            tol = float(val)
        except ValueError:
            tol = math.nan
        if not sep or not name or not (math.isfinite(tol) and tol > 0):
            raise UsageError(f"bad --tol {item!r}; expected NAME=POSITIVE_FLOAT")
        out[name] = tol
    return out


def _apply_tols(cases, tols: dict[str, float]):
    from .verify import Case

    return [Case(c.name, c.params, c.residual, tols[c.name], c.residual <= tols[c.name])
            if c.name in tols else c for c in cases]


def cmd_jw(args) -> int:
    from .jones_wenzl import jw

    ctx = _scalar(args)
    P = jw(args.n, ctx)
    terms = [{"diagram": str(d), "coefficient_re": c.real, "coefficient_im": c.imag} for d, c in P.terms.items()]
    if args.out == "csv":
        _emit(args, _csv(["diagram", "coefficient_re", "coefficient_im"], terms))
    else:
        _emit(args, _json({"N": ctx.N_opt, "q": ctx.q, "n": args.n, "terms": terms}))
    return EXIT_OK


def cmd_oracle(args) -> int:
    import numpy as np

    from . import fiber_oracle as fo
    from .verify import Case, _case, gram_battery, rec_battery

    N = _require_N(args)
    if args.n_max < 1:
        raise UsageError("--n-max must be positive")
    n_max = args.n_max
    if N ** (n_max + 2) > fo.BUDGET:
        raise BudgetExceededError(f"N^(n+2) = {N}^{n_max + 2} exceeds the dense budget {fo.BUDGET}")
    tols = _parse_tols(args.tol)
    rng = np.random.default_rng(args.seed)
    checks = ["ccirc", "gram", "rec", "pi"] if args.check == "all" else [args.check]
    cases: list[Case] = []
    if "ccirc" in checks:
        for n in range(1, min(n_max, 3) + 1):
            expected = fo.ccirc_dimension(n, N)
            cases.append(_case("ccirc_dimension", {"n": n, "N": N, "expected": expected},
                               abs(len(fo.ccirc_basis(n, N)) - expected), 0))
    if "gram" in checks:
        cases += gram_battery(rng, N=N, n_max=max(n_max, 2))
    if "rec" in checks:
        cases += rec_battery(rng, N=N, n_max=max(n_max, 2))
    if "pi" in checks:
        for b in range(0, n_max - 1):
            r = fo.pi_abc(1, b, 1, N)
            cases.append(Case("pi_deviation", {"N": N, "a": 1, "b": b, "c": 1, "lambda": r.best_lambda,
                                               "lambda_ref": r.reference_lambda}, r.deviation, math.inf, True))
    cases = _apply_tols(cases, tols)
    _emit(args, _json({"suite": f"oracle:{args.check}", "cases": [c.as_json() for c in cases]}))
    return EXIT_OK if all(c.passed for c in cases) else EXIT_FAIL


def _mu_re(args) -> float:
    if args.mu_re is not None:
        if not -1 <= args.mu_re <= 1:
            raise UsageError("--mu-re must lie in [-1, 1]")
        return args.mu_re
    return math.cos(math.pi * args.mu_index / args.k)


def cmd_gram(args) -> int:
    from .gram_recursion import _block_margin, gram_recursive, norms

    ctx = _scalar(args)
    if args.k < 1 or args.n_max < args.k:
        raise UsageError("need k >= 1 and n-max >= k")
    mu = _mu_re(args)
    rows = []
    for g in gram_recursive(args.k, mu, ctx.q, args.n_max):
        nm, inv, cond = norms(g)
        rows.append({"N": ctx.N_opt if ctx.N_opt is not None else "", "q": ctx.q, "k": args.k, "mu_re": mu,
                     "n": g.n, "norm": nm, "inv_norm": inv, "cond": cond, "margin": _block_margin(g)})
    if args.out == "csv":
        _emit(args, _csv(GRAM_COLUMNS, rows))
    else:
        _emit(args, _json({"rows": rows}))
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .gram_recursion import estimate_N0

    if args.N_min < 3 or args.N_max < args.N_min:
        raise UsageError("need 3 <= N-min <= N-max")
    rep = estimate_N0(args.k_max, args.n_max, range(args.N_min, args.N_max + 1), jobs=args.jobs)
    if args.out == "csv":
        _emit(args, _csv(SWEEP_COLUMNS, rep.rows))
        found = rep.smallest_N if rep.smallest_N is not None else "none in range"
        print(f"smallest N with margin < 1: {found}; monotone in N: {rep.monotone}", file=sys.stderr)
    else:
        _emit(args, _json({"rows": list(rep.rows), "smallest_N": rep.smallest_N, "monotone": rep.monotone}))
    return EXIT_OK


def cmd_coeffs(args) -> int:
    from .commutator_model import admissible_R, default_R, phi_bound_check, phi_table_direct, proof_K
    from .qnumerics import RecCoeffParams

    ctx = _scalar(args)
    if args.m < 0 or args.l < args.m:
        raise UsageError("need 0 <= m <= l")
    params = RecCoeffParams(args.k, _mu_re(args))
    R = default_R(ctx.q) if args.R is None else args.R
    lo, hi = admissible_R(ctx.q)
    if not lo < R < hi:
        raise UsageError(f"R must lie in ({lo}, {hi:.6g})")
    tab = phi_table_direct(args.m, args.l, args.p_max, params, ctx.q)
    rows = [{"m": args.m, "l": args.l, "p": p, "i": i, "phi_re": float(v), "phi_im": 0.0}
            for (p, i), v in sorted(tab.values.items())]
    bound = phi_bound_check(args.m, params, ctx.q, args.p_max, R)
    summary = {"K_empirical": bound.K_empirical, "stable": bound.stable, "R": R, "K_proof": proof_K(args.m, ctx.q)}
    if args.out == "csv":
        _emit(args, _csv(COEFF_COLUMNS, rows))
        print(_json(summary), end="", file=sys.stderr)
    else:
        _emit(args, _json({"rows": rows, "summary": summary}))
    return EXIT_OK


def cmd_probe(args) -> int:
    from .fiber_oracle import orthogonality_probe

    N = _require_N(args)
    grid = [(i, j) for i in range(args.i_max + 1) for j in range(args.j_max + 1)]
    rows = orthogonality_probe(args.k, args.n, grid, N, kp=args.kp, seed=args.seed, max_strands=args.max_strands)
    if args.out == "csv":
        _emit(args, _csv(PROBE_COLUMNS, rows))
    else:
        _emit(args, _json({"rows": rows}))
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import report, run_suite

    tols = _parse_tols(args.tol)
    cases = _apply_tols(run_suite(args.suite, seed=args.seed), tols)
    config = {"seed": args.seed}
    if tols:
        config["tol"] = tols
    if args.N is not None:
        config["N"] = args.N
    _emit(args, _json(report(args.suite, cases, config)))
    return EXIT_OK if all(c.passed for c in cases) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    from .verify import SUITES

    parser = argparse.ArgumentParser(prog="tlgram", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt="json", scalar=True):
        if scalar:
            p.add_argument("--N", type=int)
            p.add_argument("--q", type=float)
        p.add_argument("--out", choices=["csv", "json"], default=fmt, help="output format")
        p.add_argument("--output", help="write to this path instead of stdout")
        p.add_argument("--seed", type=int, default=0)
        return p

    p = common(sub.add_parser("jw", help="dump a Jones-Wenzl projection"))
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_jw)

    p = common(sub.add_parser("oracle", help="dense-matrix cross-checks"))
    p.add_argument("--check", choices=["all", "ccirc", "gram", "rec", "pi"], default="all")
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override the tolerance of a named case")
    p.set_defaults(func=cmd_oracle)

    p = common(sub.add_parser("gram", help="Gram blocks from the recursion"), fmt="csv")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--mu-index", type=int, default=0)
    p.add_argument("--mu-re", type=float, help="free Re(mu), overrides --mu-index")
    p.add_argument("--n-max", type=int, required=True)
    p.set_defaults(func=cmd_gram)

    p = common(sub.add_parser("sweep", help="Riesz margin sweep over N"), fmt="csv", scalar=False)
    p.add_argument("--N-min", type=int, default=3)
    p.add_argument("--N-max", type=int, default=30)
    p.add_argument("--k-max", type=int, default=4)
    p.add_argument("--n-max", type=int, default=40)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = common(sub.add_parser("coeffs", help="phi coefficients and their bound"), fmt="csv")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--mu-index", type=int, default=0)
    p.add_argument("--mu-re", type=float)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--p-max", type=int, default=40)
    p.add_argument("--R", type=float)
    p.set_defaults(func=cmd_coeffs)

    p = common(sub.add_parser("probe-orth", help="inner-product decay probe"), fmt="csv")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--kp", type=int, default=None)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--i-max", type=int, default=3)
    p.add_argument("--j-max", type=int, default=3)
    p.add_argument("--max-strands", type=int, default=7)
    p.set_defaults(func=cmd_probe)

    p = common(sub.add_parser("verify", help="run the acceptance battery"))
    p.add_argument("--suite", choices=sorted(SUITES), default="all")
    p.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override the tolerance of a named case")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except RankAmbiguityError as exc:
        print(f"rank ambiguity: {exc}", file=sys.stderr)
        return EXIT_RANK
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
