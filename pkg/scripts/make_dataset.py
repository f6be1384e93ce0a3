#!/usr/bin/env python3
"""Generate the desk-scale benchmark dataset: random obstacle scenes plus
RRT-validated (start, goal) tasks binned by joint-space distance, with
rendered goal graymaps.

Example:
    python scripts/make_dataset.py --out data/benchmark --per-bin 50
"""

import argparse
import os

from vrrt.bench import generate_scene, generate_tasks
from vrrt.kinematics import default_robot


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data/benchmark")
    ap.add_argument("--n-scenes", type=int, default=6)
    ap.add_argument("--min-obstacles", type=int, default=3)
    ap.add_argument("--max-obstacles", type=int, default=5)
    ap.add_argument("--bins", default="0.5,1.0,1.5,2.0,2.5")
    ap.add_argument("--per-bin", type=int, default=50)
    ap.add_argument("--seed", type=int, default=2026)
    args = ap.parse_args()

    model = default_robot()
    bins = tuple(float(b) for b in args.bins.split(","))
    span = args.max_obstacles - args.min_obstacles + 1
    os.makedirs(args.out, exist_ok=True)

    scene_paths = []
    for i in range(args.n_scenes):
        scene = generate_scene(seed=i, model=model,
                               n_obstacles=args.min_obstacles + i % span)
        path = os.path.join(args.out, f"scene_{i}.json")
        scene.save(path)
        scene_paths.append(path)
        print(f"wrote {path} ({len(scene.boxes)} obstacles)")

    manifest = generate_tasks(model, scene_paths, os.path.join(args.out, "tasks"),
                              bins=bins, per_bin=args.per_bin, seed=args.seed)
    print(f"wrote {manifest}")


if __name__ == "__main__":
    main()
