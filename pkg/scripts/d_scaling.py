"""Landscape measures for d = 2..6 objectives at n = 30, k = 7 on the six continuous fronts."""
import argparse

from issp.experiments import d_scaling_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--dims", default="2,3,4,5,6")
    ap.add_argument("--cache-dir")
    args = ap.parse_args()
    dims = [int(x) for x in args.dims.split(",")]
    d_scaling_suite(args.out, seed=args.seed, dims=dims, cache_dir=args.cache_dir)


if __name__ == "__main__":
    main()
