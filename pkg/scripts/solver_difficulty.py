"""Median normalized best value of GS-F, GS-B and LS over seeded runs, per front and indicator.

Prints a table and writes the per-run results to a CSV.
"""
import argparse
import csv
import statistics

from issp.indicators import INDICATORS, IndicatorConfig
from issp.pointset import SHAPES, default_n, generate
from issp.solvers import Method, run_experiment
from issp.subsetspace import Instance, build_fitness_table


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out_csv")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--runs", type=int, default=101)
    ap.add_argument("--indicators", default=",".join(i.value for i in INDICATORS))
    ap.add_argument("--cache-dir")
    args = ap.parse_args()
    rows = []
    print(f"{'shape':14s} {'ind':4s} " + " ".join(f"{m.value:>7s}" for m in Method))
    for shape in SHAPES:
        inst = Instance(generate(shape, default_n(shape), 3, args.seed), 5)
        for kind in args.indicators.split(","):
            cfg = IndicatorConfig.default(kind, inst.pointset)
            table = build_fitness_table(inst, cfg, cache_dir=args.cache_dir)
            meds = []
            for m in Method:
                res = run_experiment(inst, cfg, m, args.runs, args.seed, table)
                meds.append(statistics.median(r.normalized_value for r in res))
                rows.extend([m.value, kind, shape.value, r.seed, repr(r.best_value),
                             repr(r.normalized_value)] for r in res)
            print(f"{shape.value:14s} {kind:4s} " + " ".join(f"{v:7.4f}" for v in meds))
    with open(args.out_csv, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "indicator", "shape", "seed", "canonical", "normalized"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
