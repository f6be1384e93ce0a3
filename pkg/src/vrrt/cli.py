"""Command-line interface for the visual-goal planning toolkit.

Subcommands: gen-scenes, gen-tasks, plan, bench, render, gradcheck, viz.
Planner parameters resolve as flag > config file > default. Config files are
JSON; unknown keys are rejected. The VRRT_OUTPUT_DIR environment variable
sets the default output directory.
"""

from __future__ import annotations

import argparse
import glob
import json
import os
import sys
from dataclasses import fields

import numpy as np

from . import baselines, bench, planner as planner_mod
from .collision import Scene
from .kinematics import RobotModel, default_robot, sample_uniform
from .planner import GoalSpec, PlannerParams
from .rendering import (Camera, RenderParams, default_camera, load_pgm,
                        render, render_loss_grad, save_pgm)
from .tree import Tree
from .viz import export_tree_svg

_PARAM_FIELDS = {f.name: f.type for f in fields(PlannerParams)}
_BOOL_FIELDS = ("rewire",)


def _default_out() -> str:
    return os.environ.get("VRRT_OUTPUT_DIR", ".")


def _add_param_flags(parser: argparse.ArgumentParser) -> None:
    for f in fields(PlannerParams):
        flag = "--" + f.name.replace("_", "-")
        if f.name in _BOOL_FIELDS:
            parser.add_argument(flag, default=None, choices=("on", "off"),
                                help=f"planner parameter (default {f.default})")
        elif isinstance(f.default, bool):
            pass
        elif isinstance(f.default, int):
            parser.add_argument(flag, type=int, default=None,
                                help=f"planner parameter (default {f.default})")
        elif isinstance(f.default, float):
            parser.add_argument(flag, type=float, default=None,
                                help=f"planner parameter (default {f.default})")
        else:
            parser.add_argument(flag, type=str, default=None,
                                help=f"planner parameter (default {f.default})")


def _resolve_params(args: argparse.Namespace) -> PlannerParams:
    values: dict = {}
    config_path = getattr(args, "config", None)
    if config_path:
        with open(config_path) as f:
            data = json.load(f)
        unknown = set(data) - set(_PARAM_FIELDS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        values.update(data)
    for name in _PARAM_FIELDS:
        flag_val = getattr(args, name, None)
        if flag_val is not None:
            if name in _BOOL_FIELDS:
                flag_val = flag_val == "on"
            values[name] = flag_val
    if "rewire" in values:
        values["rewire"] = bool(values["rewire"])
    return PlannerParams(**values)


def _load_robot(args: argparse.Namespace) -> RobotModel:
    if getattr(args, "robot", None):
        return RobotModel.load(args.robot)
    return default_robot()


def _parse_q(text: str, d: int) -> np.ndarray:
    q = np.array([float(v) for v in text.split(",")])
    if q.size != d:
        raise ValueError(f"expected {d} joint values, got {q.size}")
    return q


def cmd_gen_scenes(args) -> int:
    model = _load_robot(args)
    os.makedirs(args.out, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    for i in range(args.n_scenes):
        n_obs = int(rng.integers(args.min_obstacles, args.max_obstacles + 1))
        scene = bench.generate_scene(seed=args.seed + 1000 * (i + 1), model=model,
                                     n_obstacles=n_obs,
                                     size_range=(args.min_size, args.max_size))
        scene.save(os.path.join(args.out, f"scene_{i:02d}.json"))
    print(f"wrote {args.n_scenes} scenes to {args.out}")
    return 0


def cmd_gen_tasks(args) -> int:
    model = _load_robot(args)
    scene_paths = sorted(glob.glob(os.path.join(args.scenes, "scene_*.json")))
    if not scene_paths:
        print(f"no scene files found in {args.scenes}", file=sys.stderr)
        return 1
    bins = tuple(float(b) for b in args.bins.split(","))
    manifest = bench.generate_tasks(model, scene_paths, args.out, bins=bins,
                                    per_bin=args.per_bin, seed=args.seed,
                                    rrt_budget=args.rrt_budget)
    print(f"manifest: {manifest}")
    return 0


def cmd_plan(args) -> int:
    params = _resolve_params(args)
    if not args.task and not (args.manifest and args.task_id):
        print("plan requires --task, or --manifest together with --task-id", file=sys.stderr)
        return 1
    model, camera, rp, tasks, base_dir = bench.load_manifest(args.manifest) if args.manifest \
        else (None, None, None, None, None)
    if args.task:
        with open(args.task) as f:
            task = bench.BenchTask.from_dict(json.load(f))
        base_dir = os.path.dirname(os.path.abspath(args.task))
    else:
        matches = [t for t in tasks if t.task_id == args.task_id]
        if not matches:
            print(f"task id {args.task_id!r} not in manifest", file=sys.stderr)
            return 1
        task = matches[0]
    if model is None:
        model = _load_robot(args)
        camera = default_camera(model)
        rp = RenderParams()
    noise = args.noise_sigma if args.noise_sigma > 0 else None
    result, metrics = bench.run_planner_on_task(args.planner, task, model, camera, rp,
                                                params, base_dir, noise)
    out = args.out or os.path.join(_default_out(), f"result_{task.task_id}_{args.planner}.json")
    result.save(out)
    print(f"planner={args.planner} task={task.task_id} success={metrics.success} "
          f"joint_error={metrics.joint_error:.4f} pl={metrics.path_length:.3f} "
          f"psnr={metrics.psnr_db:.2f}")
    print(f"result: {out}")
    return 0


def cmd_bench(args) -> int:
    params = _resolve_params(args)
    planners = args.planners.split(",")
    for p in planners:
        if p not in bench.PLANNERS:
            print(f"unknown planner {p!r}; choose from {bench.PLANNERS}", file=sys.stderr)
            return 1
    out = args.out or os.path.join(_default_out(), "bench_results")
    noise = args.noise_sigma if args.noise_sigma > 0 else None
    summary = bench.run_benchmark(args.manifest, planners, params, out_dir=out,
                                  workers=args.workers, noise_sigma=noise)
    for row in summary:
        print(f"{row['planner']:>10s} bin {row['bin']:.1f}: SR {row['SR']:5.1f}% "
              f"({row['n_success']}/{row['n_total']})")
    print(f"results: {out}")
    return 0


def cmd_render(args) -> int:
    model = _load_robot(args)
    camera = default_camera(model, width=args.width, height=args.height)
    q = _parse_q(args.q, model.d)
    img = render(model, q, camera)
    out = args.out or os.path.join(_default_out(), "render.pgm")
    save_pgm(out, img, binary=not args.ascii)
    print(f"wrote {out}")
    return 0


def cmd_gradcheck(args) -> int:
    model = _load_robot(args)
    camera = default_camera(model)
    rp = RenderParams()
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.cases):
        q = sample_uniform(model, rng)
        goal = render(model, sample_uniform(model, rng), camera, rp)
        _, grad = render_loss_grad(model, q, goal, camera, rp)
        h = 1e-5
        for j in range(model.d):
            dq = np.zeros(model.d)
            dq[j] = h
            from .rendering import render_loss

            fd = (render_loss(model, q + dq, goal, camera, rp)
                  - render_loss(model, q - dq, goal, camera, rp)) / (2 * h)
            denom = max(abs(fd), abs(grad[j]), 1e-8)
            worst = max(worst, abs(grad[j] - fd) / denom)
    print(f"max relative error over {args.cases} cases: {worst:.3e}")
    return 0 if worst <= args.tol else 1


def cmd_viz(args) -> int:
    model = _load_robot(args)
    scene = Scene.load(args.scene) if args.scene else None
    if args.result:
        result = planner_mod.load_result(args.result)
        tree = Tree(model.d)
        from .tree import zero_state

        prev = None
        for q in result.path:
            prev = tree.insert(np.asarray(q), prev, 0.0, zero_state(model.d))
        highlight = result.path
    else:
        print("viz requires --result", file=sys.stderr)
        return 1
    out = args.out or os.path.join(_default_out(), f"tree_{args.mode}.svg")
    export_tree_svg(tree, out, mode=args.mode, model=model, scene=scene,
                    highlight_path=highlight)
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vrrt",
        description="Visual-goal motion planning toolkit for planar arms "
                    "(defaults: eps=0.04, alpha=0.04, kappa=0.9, rho=0.7, "
                    "beta1=beta2=0.9, batch=32, M=200, r=0.3, eta=0.7).")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-scenes", help="generate random obstacle scenes")
    p.add_argument("--out", default=os.path.join(_default_out(), "scenes"))
    p.add_argument("--robot", default=None, help="robot model JSON (default desk-scale 5-link)")
    p.add_argument("--n-scenes", type=int, default=6)
    p.add_argument("--min-obstacles", type=int, default=3)
    p.add_argument("--max-obstacles", type=int, default=5)
    p.add_argument("--min-size", type=float, default=0.1)
    p.add_argument("--max-size", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen_scenes)

    p = sub.add_parser("gen-tasks", help="generate validated benchmark tasks")
    p.add_argument("--scenes", required=True, help="directory containing scene_*.json")
    p.add_argument("--out", default=os.path.join(_default_out(), "dataset"))
    p.add_argument("--robot", default=None)
    p.add_argument("--bins", default="0.5,1.0,1.5,2.0,2.5")
    p.add_argument("--per-bin", type=int, default=50)
    p.add_argument("--rrt-budget", type=int, default=4000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen_tasks)

    p = sub.add_parser("plan", help="run one planner on one task")
    p.add_argument("--planner", default="vrrt", choices=bench.PLANNERS)
    p.add_argument("--task", default=None, help="task JSON file")
    p.add_argument("--manifest", default=None, help="manifest (with --task-id)")
    p.add_argument("--task-id", default=None)
    p.add_argument("--robot", default=None)
    p.add_argument("--config", default=None, help="planner parameter JSON")
    p.add_argument("--noise-sigma", type=float, default=0.0,
                   help="noisy goal-configuration hint std (0 disables)")
    p.add_argument("--out", default=None)
    _add_param_flags(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("bench", help="run the benchmark sweep")
    p.add_argument("--manifest", required=True)
    p.add_argument("--planners", default="vrrt")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--config", default=None)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--out", default=None)
    _add_param_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("render", help="render a configuration to a graymap")
    p.add_argument("--robot", default=None)
    p.add_argument("--q", required=True, help="comma-separated joint angles (rad)")
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--ascii", action="store_true", help="write P2 instead of P5")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("gradcheck", help="finite-difference check of the render gradient")
    p.add_argument("--robot", default=None)
    p.add_argument("--cases", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("viz", help="export a planned path as SVG")
    p.add_argument("--result", required=True, help="plan result JSON")
    p.add_argument("--robot", default=None)
    p.add_argument("--scene", default=None)
    p.add_argument("--mode", default="workspace", choices=("workspace", "pca"))
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_viz)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, json.JSONDecodeError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
