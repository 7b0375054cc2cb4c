"""Analysis reports, correlation grids and the full experiment suite."""
from __future__ import annotations

import csv
import itertools
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .indicators import INDICATORS, Indicator, IndicatorConfig
from .landscape import Comparator, Landscape, normalized_histogram, rank_correlation, value_distribution
from .lon import build_lon, export_dot, export_graphml, export_json
from .pointset import SHAPES, Shape, default_n, generate
from .solvers import Method, run_experiment
from .subsetspace import DEFAULT_BUDGET, FitnessTable, Instance, build_fitness_table

MEASURES = ("global_optima_count", "global_plateaus", "local_optima_count", "local_plateaus",
            "neutrality", "ruggedness", "fdc_hamming", "fdc_wasserstein")


@dataclass
class InstanceSpec:
    """Everything needed to regenerate an instance; embedded in every report."""
    shape: str
    n: int
    d: int
    k: int
    seed: int
    instance_file: str | None = None

    def build(self) -> Instance:
        if self.instance_file:
            from .pointset import load
            ps = load(self.instance_file)
        else:
            ps = generate(self.shape, self.n, self.d, self.seed)
        return Instance(ps, self.k)


@dataclass
class Analysis:
    report: dict
    table: FitnessTable
    landscape: Landscape
    timing: dict = field(default_factory=dict)


def _num(x):
    x = float(x)
    return None if math.isnan(x) else x


def analyze(instance: Instance, config: IndicatorConfig, comparator: Comparator | None = None, *,
            cache_dir=None, spec: InstanceSpec | None = None, wasserstein: bool = True,
            budget: int = DEFAULT_BUDGET) -> Analysis:
    comparator = comparator or Comparator()
    timing = {}
    t0 = time.perf_counter()
    table = build_fitness_table(instance, config, cache_dir=cache_dir, budget=budget)
    timing["table"] = time.perf_counter() - t0

    land = Landscape(table, comparator)
    t0 = time.perf_counter()
    land.scan()
    opt = land.find_optima()
    timing["optima"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    land.compute_basins()
    timing["basins"] = time.perf_counter() - t0
    measures = {
        "global_optima_count": int(len(opt.global_optima)),
        "global_plateaus": int(opt.global_plateaus),
        "local_optima_count": int(len(opt.local_optima)),
        "local_plateaus": int(opt.local_plateaus),
        "neutrality": land.neutrality(),
        "ruggedness": _num(land.ruggedness()),
    }
    t0 = time.perf_counter()
    measures["fdc_hamming"] = _num(land.fdc("hamming"))
    timing["fdc_hamming"] = time.perf_counter() - t0
    if wasserstein:
        t0 = time.perf_counter()
        measures["fdc_wasserstein"] = _num(land.fdc("wasserstein", instance.pointset.points))
        timing["fdc_wasserstein"] = time.perf_counter() - t0
    else:
        measures["fdc_wasserstein"] = None

    ps = instance.pointset
    spec = spec or InstanceSpec(ps.shape.value, ps.n, ps.d, instance.k, ps.seed)
    report = {
        "software": {"name": "issp", "version": __version__},
        "config": {**vars(spec), "indicator": config.kind.value,
                   "tol_rel": comparator.tol_rel, "tol_abs": comparator.tol_abs,
                   "s": config.s, "wasserstein": wasserstein},
        "instance": {"shape": ps.shape.value, "d": ps.d, "n": ps.n, "k": instance.k,
                     "seed": ps.seed, "hash": instance.content_hash().hex(),
                     "warnings": list(ps.warnings)},
        "indicator": config.to_dict(),
        "comparator": {"tol_rel": comparator.tol_rel, "tol_abs": comparator.tol_abs},
        "measures": measures,
        "global_optima": [int(x) for x in opt.global_optima],
        "value_distribution": value_distribution(table.values),
        "timing": timing,
    }
    return Analysis(report, table, land, timing)


def report_json(report: dict) -> str:
    return json.dumps(report, indent=1, sort_keys=True)


def strip_timing(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timing"}


def long_rows(report: dict) -> list[list]:
    inst = report["instance"]
    name = f"{inst['shape']}-d{inst['d']}-n{inst['n']}-k{inst['k']}-s{inst['seed']}"
    return [[name, report["indicator"]["kind"], inst["shape"], m, report["measures"][m]]
            for m in MEASURES]


def write_long_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["instance", "indicator", "shape", "measure", "value"])
        w.writerows(rows)


def write_distribution_csv(path, table: FitnessTable, shape: str, bins: int = 50) -> None:
    counts, edges = normalized_histogram(table.values, bins)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["indicator", "shape", "bin_lo", "bin_hi", "count"])
        for c, lo, hi in zip(counts, edges[:-1], edges[1:]):
            w.writerow([table.kind.value, shape, repr(float(lo)), repr(float(hi)), int(c)])


def correlation_rows(tables: dict, shape: str) -> list[list]:
    rows = []
    for a, b in itertools.combinations(tables, 2):
        rows.append([Indicator(a).value, Indicator(b).value, shape,
                     _num(rank_correlation(tables[a], tables[b]))])
    return rows


def write_correlation_csv(dest, rows) -> None:
    """``dest`` is a path or an open text stream."""
    fh = dest if hasattr(dest, "write") else open(dest, "w", newline="")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["indicator_a", "indicator_b", "shape", "spearman"])
        w.writerows(rows)
    finally:
        if fh is not dest:
            fh.close()


def export_lon(lon, path, self_loops: bool = True) -> None:
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".graphml":
        export_graphml(lon, path, self_loops=self_loops)
    elif suffix in (".dot", ".gv"):
        export_dot(lon, path, self_loops=self_loops)
    elif suffix == ".json":
        export_json(lon, path)
    else:
        raise ValueError(f"unknown LON format {suffix!r} (use .graphml, .dot or .json)")


def paper_suite(out_dir, *, seed: int = 1, d: int = 3, n: int | None = None, k: int = 5,
                shapes=SHAPES, indicators=INDICATORS, runs: int = 101, solve: bool = True,
                lon_D: int | None = 4, comparator: Comparator | None = None, cache_dir=None,
                log=print) -> dict:
    """Run every shape x indicator instance and write one CSV per figure.

    Returns ``{(shape, indicator): report}``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    comparator = comparator or Comparator()
    reports = {}
    long, corr, dist_rows, solver_rows = [], [], [], []
    for shape in shapes:
        shape = Shape(shape)
        ps = generate(shape, n or default_n(shape), d, seed)
        inst = Instance(ps, k)
        tables = {}
        for kind in indicators:
            kind = Indicator(kind)
            t0 = time.perf_counter()
            cfg = IndicatorConfig.default(kind, ps)
            res = analyze(inst, cfg, comparator, cache_dir=cache_dir)
            reports[(shape.value, kind.value)] = res.report
            long.extend(long_rows(res.report))
            counts, edges = normalized_histogram(res.table.values)
            dist_rows.extend([kind.value, shape.value, repr(float(lo)), repr(float(hi)), int(c)]
                             for c, lo, hi in zip(counts, edges[:-1], edges[1:]))
            tables[kind] = res.table
            if lon_D:
                lon = build_lon(res.table, res.landscape.find_optima(),
                                res.landscape.compute_basins(), lon_D)
                export_json(lon, out / f"lon_{kind.value}_{shape.value}.json")
            if solve:
                for method in Method:
                    for r in run_experiment(inst, cfg, method, runs, seed, res.table):
                        solver_rows.append([method.value, kind.value, shape.value, r.seed,
                                            repr(r.best_value), repr(r.normalized_value)])
            log(f"{shape.value:14s} {kind.value:4s} {time.perf_counter() - t0:6.1f}s")
            del res
        corr.extend(correlation_rows(tables, shape.value))
        del tables
    write_long_csv(out / "measures.csv", long)
    write_correlation_csv(out / "correlation.csv", corr)
    with open(out / "distribution.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["indicator", "shape", "bin_lo", "bin_hi", "count"])
        w.writerows(dist_rows)
    if solve:
        with open(out / "solvers.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["method", "indicator", "shape", "seed", "canonical", "normalized"])
            w.writerows(solver_rows)
    (out / "reports.json").write_text(json.dumps(
        {f"{s}/{i}": strip_timing(r) for (s, i), r in reports.items()}, indent=1, sort_keys=True))
    return reports


def d_scaling_suite(out_dir, *, seed: int = 1, dims=range(2, 7), n: int = 30, k: int = 7,
                    indicators=INDICATORS, comparator: Comparator | None = None, cache_dir=None,
                    log=print) -> dict:
    """Landscape measures versus objective count; the discontinuous front is left out."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    comparator = comparator or Comparator()
    reports, rows = {}, []
    for d in dims:
        for shape in SHAPES:
            if shape is Shape.DISCONTINUOUS:
                continue
            inst = Instance(generate(shape, n, d, seed), k)
            for kind in indicators:
                kind = Indicator(kind)
                t0 = time.perf_counter()
                res = analyze(inst, IndicatorConfig.default(kind, inst.pointset), comparator,
                              cache_dir=cache_dir)
                reports[(d, shape.value, kind.value)] = res.report
                rows.extend(long_rows(res.report))
                log(f"d={d} {shape.value:14s} {kind.value:4s} {time.perf_counter() - t0:6.1f}s")
    write_long_csv(out / "d_scaling.csv", rows)
    return reports
