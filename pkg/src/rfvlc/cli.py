"""Command-line front end.

Exit codes: 0 success, 1 usage or config error, 2 numeric failure,
3 tolerance breach in ``compare``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from . import __version__
from .config import MODES, ConfigError, load_config
from .design import (FREE_PARAMETERS, DesignTarget, solve_offload_asymptotic, solve_offload_closed,
                     solve_offload_numeric)
from .estimators import METRICS
from .experiment import ExperimentSpec, emit_results, parse_sweep, run_experiment

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_TOLERANCE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p, engine_default=None):
    p.add_argument("--config", metavar="PATH", help="key = value config file (reference defaults if omitted)")
    p.add_argument("--mode", choices=MODES, default="vlc_only")
    p.add_argument("--metric", choices=METRICS, default="coverage")
    p.add_argument("--sweep", metavar="PARAM=START:STOP:STEP")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--out", metavar="PATH", help="output file (stdout if omitted)")
    p.add_argument("--jobs", type=int, default=1, help="sweep points evaluated in parallel")
    p.add_argument("--no-timing", action="store_true",
                   help="leave the seconds column empty so repeated runs are byte-identical")
    if engine_default is not None:
        p.add_argument("--engine", choices=("mc", "analytic", "both"), default=engine_default)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rfvlc", description="Coverage and association analysis of coexisting RF/VLC networks")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    _common(sub.add_parser("simulate", help="Monte-Carlo estimates"))
    _common(sub.add_parser("analyze", help="analytic evaluation"))
    p = sub.add_parser("compare", help="both engines; exit 3 if any point differs by more than --tolerance")
    _common(p)
    p.add_argument("--tolerance", type=float, default=0.02,
                   help="absolute tolerance (relative for the rate metric)")
    _common(sub.add_parser("sweep", help="parameter sweep with the chosen engine(s)"), engine_default="both")

    p = sub.add_parser("design", help="solve P_o = beta for one parameter")
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--free-parameter", choices=FREE_PARAMETERS, default="z1")
    p.add_argument("--method", choices=("closed", "asymptotic", "numeric", "all"), default="all")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("selftest", help="special-function and oracle checks")
    p.add_argument("--quick", action="store_true", help="skip the Monte-Carlo cross-check")

    p = sub.add_parser("config", help="echo a config with its derived quantities")
    p.add_argument("--config", metavar="PATH")
    return parser


def _write(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _spec(args, engines):
    name, values = ("", ())
    if args.sweep:
        name, values = parse_sweep(args.sweep)
    return ExperimentSpec(mode=args.mode, metric=args.metric, sweep_param=name, sweep_values=values,
                          trials=args.trials, seed=args.seed, engines=engines, n_jobs=args.jobs)


def _report_errors(rows):
    bad = [r for r in rows if r.error]
    for r in bad:
        where = f"{r.sweep_param}={r.sweep_value}" if r.sweep_param else "single point"
        print(f"rfvlc: {r.engine} failed at {where}: {r.error}", file=sys.stderr)
    return any(r.error.startswith("numeric") for r in bad), bool(bad)


def _breaches(rows, tol, relative):
    pairs = {}
    for r in rows:
        pairs.setdefault((r.sweep_value, r.metric), {})[r.engine] = r
    out = []
    for (sv, metric), d in pairs.items():
        if "mc" not in d or "analytic" not in d:
            continue
        a, m = d["analytic"].value, d["mc"].value
        if not (math.isfinite(a) and math.isfinite(m)):
            out.append((sv, metric, a, m, float("nan")))
            continue
        diff = abs(a - m) / abs(a) if relative and a != 0 else abs(a - m)
        if diff > tol:
            out.append((sv, metric, a, m, diff))
    return out


def _cmd_experiment(args, engines):
    cfg = load_config(args.config)
    spec = _spec(args, engines)
    rows = run_experiment(spec, cfg)
    _write(emit_results(rows, args.format, None, timing=not args.no_timing), args.out)
    numeric, _ = _report_errors(rows)
    if numeric:
        return EXIT_NUMERIC
    if args.command == "compare":
        breaches = _breaches(rows, args.tolerance, args.metric == "rate")
        for sv, metric, a, m, diff in breaches:
            print(f"rfvlc: tolerance breach at {spec.sweep_param or 'point'}={sv} {metric}: "
                  f"analytic={a:.9g} mc={m:.9g} diff={diff:.3g} > {args.tolerance}", file=sys.stderr)
        if breaches:
            return EXIT_TOLERANCE
    return EXIT_OK


def _cmd_design(args):
    cfg = load_config(args.config)
    target = DesignTarget(args.beta, args.free_parameter, cfg)
    methods = ("closed", "asymptotic", "numeric") if args.method == "all" else (args.method,)
    solvers = {"closed": solve_offload_closed, "asymptotic": solve_offload_asymptotic,
               "numeric": solve_offload_numeric}
    records = []
    for m in methods:
        try:
            sol = solvers[m](target)
            rec = {"method": m, "free_parameter": sol.free_parameter, "value": sol.value,
                   "feasible": sol.feasible, "achieved_beta_model": sol.achieved_beta_closed,
                   "achieved_beta_exact": sol.achieved_beta_exact, "diagnostic": sol.diagnostic}
        except ValueError as exc:
            rec = {"method": m, "free_parameter": args.free_parameter, "value": float("nan"),
                   "feasible": False, "achieved_beta_model": float("nan"),
                   "achieved_beta_exact": float("nan"), "diagnostic": str(exc)}
        records.append(rec)
    keys = ("method", "free_parameter", "value", "feasible", "achieved_beta_model",
            "achieved_beta_exact", "diagnostic")

    def cell(v):
        if isinstance(v, bool):
            return str(v).lower()
        if isinstance(v, float):
            return format(v, ".9g")
        return str(v)

    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys)
        for rec in records:
            w.writerow([cell(rec[k]) for k in keys])
        text = buf.getvalue()
    else:
        text = "".join(json.dumps({k: (None if isinstance(rec[k], float) and not math.isfinite(rec[k])
                                        else rec[k]) for k in keys}) + "\n" for rec in records)
    _write(text, args.out)
    return EXIT_OK


def _cmd_config(args):
    cfg = load_config(args.config)
    for k, v in cfg.to_mapping().items():
        print(f"{k} = {v}")
    print("# derived")
    for k, v in cfg.derived().items():
        print(f"# {k} = {v:.9g}")
    return EXIT_OK


def _cmd_selftest(args):
    from .selftest import run_selftest
    results = run_selftest(include_mc=not args.quick)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return EXIT_OK if all(ok for _n, ok, _d in results) else EXIT_NUMERIC


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("simulate", "analyze", "compare", "sweep"):
            engines = {"simulate": "mc", "analyze": "analytic", "compare": "both"}.get(args.command)
            return _cmd_experiment(args, engines or args.engine)
        if args.command == "design":
            return _cmd_design(args)
        if args.command == "config":
            return _cmd_config(args)
        return _cmd_selftest(args)
    except (ConfigError, ValueError) as exc:
        print(f"rfvlc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ArithmeticError as exc:
        print(f"rfvlc: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"rfvlc: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
