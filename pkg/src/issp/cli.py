"""``issp`` command-line entry point.

Exit codes: 0 success, 2 usage error, 3 validation error, 4 resource refusal.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .experiments import (InstanceSpec, analyze, correlation_rows, d_scaling_suite, export_lon,
                          long_rows, paper_suite, report_json, write_correlation_csv,
                          write_distribution_csv, write_long_csv)
from .indicators import INDICATORS, Indicator, IndicatorConfig
from .landscape import Comparator
from .lon import build_lon
from .pointset import SHAPES, Shape, default_n, generate, load, save
from .solvers import Method, results_csv, run_experiment
from .subsetspace import DEFAULT_BUDGET, BudgetExceeded, build_fitness_table

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_RESOURCE = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _instance_flags(p: argparse.ArgumentParser, seed_required: bool = False) -> None:
    p.add_argument("--instance", help="point-set JSON file (instead of --shape)")
    p.add_argument("--shape", choices=[s.value for s in SHAPES])
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--n", type=int, default=None, help="default 50, or 49 for discontinuous")
    p.add_argument("--seed", type=int, required=seed_required, default=None if seed_required else 1)


def _analysis_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--tol-rel", type=float, default=1e-9)
    p.add_argument("--tol-abs", type=float, default=1e-12)
    p.add_argument("--cache-dir", help="directory for binary fitness tables")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                   help="maximum number of table entries")


def _indicator_flags(p: argparse.ArgumentParser, many: bool, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    if many:
        g.add_argument("--indicator", action="append", type=Indicator.parse,
                       help="repeatable; hv igd igd+ eps r2 nr2 se")
    else:
        g.add_argument("--indicator", type=Indicator.parse)
    if many:
        g.add_argument("--all-indicators", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="issp", description="Exact landscape analysis of "
                                 "indicator-based subset selection.")
    ap.add_argument("--version", action="version", version=f"issp {__version__}")
    ap.add_argument("--workers", type=int, default=None,
                    help="thread count for parallel kernels (default: all cores)")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a point set")
    g.add_argument("--shape", choices=[s.value for s in SHAPES], required=True)
    g.add_argument("--d", type=int, default=3)
    g.add_argument("--n", type=int, default=None)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("-o", "--out", required=True)

    a = sub.add_parser("analyze", help="enumerate and compute all landscape measures")
    _instance_flags(a)
    _analysis_flags(a)
    _indicator_flags(a, many=True, required=False)
    a.add_argument("-o", "--out", help="report JSON (stdout if omitted)")
    a.add_argument("--csv", help="long-format measures CSV")
    a.add_argument("--distribution", help="normalized value histogram CSV")
    a.add_argument("--bins", type=int, default=50)
    a.add_argument("--no-wasserstein", action="store_true")
    a.add_argument("--from-report", help="re-run using the config embedded in a report")

    c = sub.add_parser("correlate", help="pairwise Spearman correlation of fitness tables")
    _instance_flags(c)
    _analysis_flags(c)
    _indicator_flags(c, many=True)
    c.add_argument("-o", "--out", help="CSV (stdout if omitted)")

    lo = sub.add_parser("lon", help="build and export a local optima network")
    _instance_flags(lo)
    _analysis_flags(lo)
    _indicator_flags(lo, many=False)
    lo.add_argument("--D", type=int, default=4, help="escape distance (even)")
    lo.add_argument("--no-self-loops", action="store_true")
    lo.add_argument("-o", "--out", required=True, help=".graphml, .dot or .json")

    s = sub.add_parser("solve", help="run GS-F, GS-B or LS repeatedly")
    _instance_flags(s)
    s.add_argument("--k", type=int, default=5)
    s.add_argument("--cache-dir")
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    _indicator_flags(s, many=False)
    s.add_argument("--method", choices=[m.value for m in Method], required=True)
    s.add_argument("--runs", type=int, default=101)
    s.add_argument("--run-seed", type=int, default=None,
                   help="first run seed (default: --seed)")
    s.add_argument("--no-normalize", action="store_true",
                   help="skip the full table used for normalized values")
    s.add_argument("-o", "--out", help="CSV (stdout if omitted)")

    ps = sub.add_parser("paper-suite", help="full shape x indicator grid, one CSV per figure")
    ps.add_argument("--seed", type=int, default=1)
    ps.add_argument("--k", type=int, default=5)
    ps.add_argument("--d", type=int, default=3)
    ps.add_argument("--runs", type=int, default=101)
    ps.add_argument("--D", type=int, default=4)
    ps.add_argument("--tol-rel", type=float, default=1e-9)
    ps.add_argument("--tol-abs", type=float, default=1e-12)
    ps.add_argument("--cache-dir")
    ps.add_argument("--no-solvers", action="store_true")
    ps.add_argument("--d-scaling", action="store_true",
                    help="also run n=30, k=7 for d = 2..6")
    ps.add_argument("-o", "--out", required=True, help="output directory")
    return ap


# -- helpers -----------------------------------------------------------------

def _spec(args) -> InstanceSpec:
    if args.instance and args.shape:
        raise UsageError("--instance and --shape are mutually exclusive")
    if args.instance:
        ps = load(args.instance)
        return InstanceSpec(ps.shape.value, ps.n, ps.d, args.k, ps.seed, str(args.instance))
    if not args.shape:
        raise UsageError("one of --instance or --shape is required")
    n = args.n if args.n is not None else default_n(args.shape)
    return InstanceSpec(args.shape, n, args.d, args.k, args.seed)


def _kinds(args) -> list[Indicator]:
    if getattr(args, "all_indicators", False):
        return list(INDICATORS)
    kinds = args.indicator if isinstance(args.indicator, list) else [args.indicator]
    return list(dict.fromkeys(kinds))


def _emit(text: str, path) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _set_workers(n) -> None:
    if n is None:
        return
    import numba
    if n < 1:
        raise UsageError("--workers must be >= 1")
    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


# -- commands ------------------------------------------------------------------

def cmd_generate(args) -> int:
    n = args.n if args.n is not None else default_n(args.shape)
    ps = generate(args.shape, n, args.d, args.seed)
    save(ps, args.out)
    for w in ps.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def _jobs_from_report(path) -> list[tuple]:
    doc = json.loads(Path(path).read_text())
    jobs = []
    for rep in doc.get("reports", [doc]):
        cfg = rep["config"]
        spec = InstanceSpec(cfg["shape"], cfg["n"], cfg["d"], cfg["k"], cfg["seed"],
                            cfg.get("instance_file"))
        jobs.append((spec, Indicator(cfg["indicator"]), Comparator(cfg["tol_rel"], cfg["tol_abs"]),
                     cfg.get("s"), cfg.get("wasserstein", True)))
    return jobs


def cmd_analyze(args) -> int:
    if args.from_report:
        if args.indicator or args.all_indicators or args.shape or args.instance:
            raise UsageError("--from-report cannot be combined with instance or indicator flags")
        jobs = _jobs_from_report(args.from_report)
    else:
        if not (args.indicator or args.all_indicators):
            raise UsageError("one of --indicator or --all-indicators is required")
        spec = _spec(args)
        comparator = Comparator(args.tol_rel, args.tol_abs)
        jobs = [(spec, kind, comparator, None, not args.no_wasserstein) for kind in _kinds(args)]
    reports, rows = [], []
    built = {}
    for spec, kind, comparator, s_value, wasserstein in jobs:
        key = (spec.shape, spec.n, spec.d, spec.k, spec.seed, spec.instance_file)
        if key not in built:
            built[key] = spec.build()
        inst = built[key]
        config = IndicatorConfig.default(kind, inst.pointset,
                                         s=s_value if kind is Indicator.SE else None)
        res = analyze(inst, config, comparator, cache_dir=args.cache_dir, spec=spec,
                      wasserstein=wasserstein, budget=args.budget)
        reports.append(res.report)
        rows.extend(long_rows(res.report))
        if args.distribution:
            path = Path(args.distribution)
            if len(jobs) > 1:
                path = path.with_name(f"{path.stem}_{kind.value}{path.suffix}")
            write_distribution_csv(path, res.table, spec.shape, args.bins)
    body = reports[0] if len(reports) == 1 else {"reports": reports}
    _emit(report_json(body) + "\n", args.out)
    if args.csv:
        write_long_csv(args.csv, rows)
    return EXIT_OK


def cmd_correlate(args) -> int:
    spec = _spec(args)
    kinds = _kinds(args)
    if len(kinds) < 2:
        raise UsageError("correlate needs at least two indicators")
    inst = spec.build()
    tables = {k: build_fitness_table(inst, IndicatorConfig.default(k, inst.pointset),
                                     cache_dir=args.cache_dir, budget=args.budget)
              for k in kinds}
    rows = correlation_rows(tables, spec.shape)
    write_correlation_csv(args.out or sys.stdout, rows)
    return EXIT_OK


def cmd_lon(args) -> int:
    spec = _spec(args)
    inst = spec.build()
    config = IndicatorConfig.default(args.indicator, inst.pointset)
    res = analyze(inst, config, Comparator(args.tol_rel, args.tol_abs),
                  cache_dir=args.cache_dir, spec=spec, wasserstein=False, budget=args.budget)
    lon = build_lon(res.table, res.landscape.find_optima(), res.landscape.compute_basins(), args.D)
    export_lon(lon, args.out, self_loops=not args.no_self_loops)
    return EXIT_OK


def cmd_solve(args) -> int:
    spec = _spec(args)
    inst = spec.build()
    config = IndicatorConfig.default(args.indicator, inst.pointset)
    table = None
    if not args.no_normalize:
        table = build_fitness_table(inst, config, cache_dir=args.cache_dir, budget=args.budget)
    base = args.run_seed if args.run_seed is not None else spec.seed
    results = run_experiment(inst, config, args.method, args.runs, base, table)
    _emit(results_csv(results, config.kind), args.out)
    return EXIT_OK


def cmd_paper_suite(args) -> int:
    comparator = Comparator(args.tol_rel, args.tol_abs)
    log = lambda msg: print(msg, file=sys.stderr, flush=True)  # noqa: E731
    paper_suite(args.out, seed=args.seed, d=args.d, k=args.k, runs=args.runs,
                solve=not args.no_solvers, lon_D=args.D, comparator=comparator,
                cache_dir=args.cache_dir, log=log)
    if args.d_scaling:
        d_scaling_suite(args.out, seed=args.seed, comparator=comparator,
                        cache_dir=args.cache_dir, log=log)
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "analyze": cmd_analyze, "correlate": cmd_correlate,
            "lon": cmd_lon, "solve": cmd_solve, "paper-suite": cmd_paper_suite}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    # `issp --paper-suite ...` is accepted as an alias of the subcommand
    argv = ["paper-suite" if a == "--paper-suite" else a for a in argv]
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _set_workers(args.workers)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"issp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BudgetExceeded, MemoryError) as exc:
        print(f"issp: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValueError, KeyError, OSError) as exc:
        print(f"issp: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
