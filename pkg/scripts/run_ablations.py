#!/usr/bin/env python3
"""Ablation sweeps over the planner's sampling, optimizer, and noisy-goal
settings, each run on a single distance bin of a generated benchmark.

Sweeps:
    sampling   frontier ratio eta in {0.7 (default), 0} and explore ratio
               r in {0.3 (default), 0.9}              (bin 1.5 by default)
    optimizer  step strategies and Adam beta1 in {0.9, 0.5}  (bin 1.5)
    noise      noisy-goal hint sigma in {0.05, 0.1, 0.15, 0.2} plus the
               visual-only planner                    (bin 2.0 by default)

Example:
    python scripts/run_ablations.py --manifest data/benchmark/tasks/manifest.json \
        --sweep sampling --out results/ablate_sampling.csv
"""

import argparse
import csv

import numpy as np

from vrrt.bench import load_manifest, run_planner_on_task
from vrrt.planner import PlannerParams


def sweep_variants(name: str):
    if name == "sampling":
        return 1.5, [
            ("default", PlannerParams(), None),
            ("eta=0", PlannerParams(frontier_ratio=0.0), None),
            ("r=0.9", PlannerParams(explore_ratio=0.9), None),
        ]
    if name == "optimizer":
        return 1.5, [
            ("adam b1=0.9", PlannerParams(), None),
            ("adam b1=0.5", PlannerParams(beta1=0.5), None),
            ("naive", PlannerParams(strategy="naive"), None),
            ("momentum", PlannerParams(strategy="momentum"), None),
            ("rmsprop", PlannerParams(strategy="rmsprop"), None),
            ("adagrad", PlannerParams(strategy="adagrad"), None),
            ("lion", PlannerParams(strategy="lion", alpha=0.01), None),
        ]
    if name == "noise":
        return 2.0, [("visual-only", PlannerParams(), None)] + [
            (f"sigma={s}", PlannerParams(), s) for s in (0.05, 0.1, 0.15, 0.2)
        ]
    raise SystemExit(f"unknown sweep: {name}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--manifest", required=True)
    ap.add_argument("--sweep", choices=("sampling", "optimizer", "noise"),
                    default="sampling")
    ap.add_argument("--bin", type=float, default=None,
                    help="override the sweep's default distance bin")
    ap.add_argument("--out", default=None, help="optional CSV for the results")
    args = ap.parse_args()

    default_bin, variants = sweep_variants(args.sweep)
    bin_center = args.bin if args.bin is not None else default_bin
    model, camera, rp, tasks, base = load_manifest(args.manifest)
    tasks = [t for t in tasks if t.bin_center == bin_center]
    if not tasks:
        raise SystemExit(f"no tasks in bin {bin_center}")

    rows = []
    print(f"{len(tasks)} tasks in bin {bin_center}")
    for label, params, sigma in variants:
        metrics = [run_planner_on_task("vrrt", t, model, camera, rp, params, base,
                                       noise_sigma=sigma)[1] for t in tasks]
        wins = [m for m in metrics if m.success]
        sr = len(wins) / len(metrics)
        time_mean = float(np.mean([m.plan_time for m in wins])) if wins else float("nan")
        pl_mean = float(np.mean([m.path_length for m in wins])) if wins else float("nan")
        rows.append({"variant": label, "bin": bin_center, "SR": sr,
                     "time_mean": time_mean, "pl_mean": pl_mean,
                     "n_success": len(wins), "n_total": len(metrics)})
        print(f"{label:<14} SR {sr:.2f} ({len(wins)}/{len(metrics)}) "
              f"time {time_mean:.2f}s PL {pl_mean:.2f} rad")

    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
