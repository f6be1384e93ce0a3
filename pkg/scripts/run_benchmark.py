#!/usr/bin/env python3
"""Run the full planner comparison on a generated benchmark and print the
per-bin success-rate / time / path-length table.

Example:
    python scripts/run_benchmark.py --manifest data/benchmark/tasks/manifest.json \
        --planners vrrt,gd,two-stage,rrt,rrt-star --out results/main
"""

import argparse

from vrrt.bench import run_benchmark
from vrrt.planner import PlannerParams


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--manifest", required=True)
    ap.add_argument("--planners", default="vrrt,gd,two-stage,rrt,rrt-star")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--noise-sigma", type=float, default=None,
                    help="stddev of the optional noisy joint-space goal hint")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None, help="directory for per_task/summary CSVs")
    args = ap.parse_args()

    params = PlannerParams(seed=args.seed)
    summary = run_benchmark(args.manifest, args.planners.split(","), params,
                            out_dir=args.out, workers=args.workers,
                            noise_sigma=args.noise_sigma)
    header = f"{'planner':<10} {'bin':>4} {'SR':>6} {'time[s]':>8} {'PL[rad]':>8} {'n':>7}"
    print(header)
    print("-" * len(header))
    for row in summary:
        print(f"{row['planner']:<10} {row['bin']:>4} {row['SR']:>6.2f} "
              f"{row['time_mean']:>8.2f} {row['pl_mean']:>8.2f} "
              f"{row['n_success']:>3}/{row['n_total']:<3}")


if __name__ == "__main__":
    main()
