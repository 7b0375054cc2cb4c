"""Regenerate the 7 x 7 grid of instances with measures, correlations, LONs and solver runs.

Usage: python scripts/run_paper_suite.py OUT_DIR [--seed 1] [--cache-dir DIR] [--no-solvers]
"""
import argparse

from issp.experiments import paper_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--cache-dir")
    ap.add_argument("--runs", type=int, default=101)
    ap.add_argument("--no-solvers", action="store_true")
    args = ap.parse_args()
    paper_suite(args.out, seed=args.seed, runs=args.runs, solve=not args.no_solvers,
                cache_dir=args.cache_dir)


if __name__ == "__main__":
    main()
