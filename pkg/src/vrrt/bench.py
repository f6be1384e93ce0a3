"""Dataset generation, metrics, and benchmark execution.

Scenes are random box layouts placed around the canonical start pose; tasks
are goal configurations stratified by C-space distance into bins, each
validated to be collision-free and RRT-reachable, with the goal image
rendered and saved alongside. The benchmark runner evaluates planners over a
task manifest and emits a per-task log plus aggregated summary rows.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import baselines, planner as planner_mod
from .collision import Box, Scene, config_in_collision, edge_collision_free
from .kinematics import RobotModel, default_robot
from .planner import GoalSpec, PlanResult, PlannerParams
from .rendering import Camera, RenderParams, default_camera, load_pgm, psnr, render, save_pgm

DEFAULT_BINS = (0.5, 1.0, 1.5, 2.0, 2.5)
BIN_BAND = 0.1
SUCCESS_JOINT_ERROR = 0.05
PLANNERS = ("vrrt", "gd", "two-stage", "rrt", "rrt-star")


@dataclass(frozen=True)
class BenchTask:
    task_id: str
    scene_path: str
    q_start: np.ndarray
    q_goal: np.ndarray          # ground truth; hidden from visual planners
    goal_image_path: str
    bin_center: float
    seed: int

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "scene": self.scene_path,
            "q_start": [float(v) for v in self.q_start],
            "q_goal": [float(v) for v in self.q_goal],
            "goal_image": self.goal_image_path,
            "bin": float(self.bin_center),
            "seed": int(self.seed),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BenchTask":
        return cls(
            task_id=data["task_id"],
            scene_path=data["scene"],
            q_start=np.asarray(data["q_start"], dtype=np.float64),
            q_goal=np.asarray(data["q_goal"], dtype=np.float64),
            goal_image_path=data["goal_image"],
            bin_center=float(data["bin"]),
            seed=int(data["seed"]),
        )


@dataclass(frozen=True)
class Metrics:
    success: bool
    joint_error: float
    per_joint_errors: np.ndarray
    path_length: float
    plan_time: float
    psnr_db: float


def generate_scene(seed: int, model: RobotModel, n_obstacles: int = 4,
                   size_range: tuple[float, float] = (0.1, 0.3),
                   workspace: Box | None = None, canonical_q: np.ndarray | None = None,
                   max_tries: int = 2000) -> Scene:
    """Two-stage obstacle placement around the canonical pose.

    Stage 1 drops roughly half the boxes near the arm's links without touching
    them; stage 2 scatters the rest uniformly in the workspace. The canonical
    pose is kept collision-free throughout.
    """
    if n_obstacles < 0:
        raise ValueError("n_obstacles must be >= 0")
    rng = np.random.default_rng(seed)
    if workspace is None:
        r = model.reach * 1.1
        workspace = Box(np.array([-r, -r]), np.array([r, r]))
    if canonical_q is None:
        canonical_q = np.zeros(model.d)
    boxes: list[Box] = []
    n_near = n_obstacles // 2
    from .kinematics import forward_kinematics

    skeleton = forward_kinematics(model, canonical_q).points
    tries = 0
    while len(boxes) < n_obstacles:
        tries += 1
        if tries > max_tries:
            raise RuntimeError(f"scene generation failed after {max_tries} placement attempts")
        size = rng.uniform(size_range[0], size_range[1], size=2)
        if len(boxes) < n_near:
            anchor = skeleton[rng.integers(len(skeleton))]
            offset = rng.uniform(-0.5, 0.5, size=2)
            center = anchor + offset
        else:
            center = rng.uniform(workspace.lo + size / 2, workspace.hi - size / 2)
        lo = center - size / 2
        hi = center + size / 2
        if np.any(lo < workspace.lo) or np.any(hi > workspace.hi):
            continue
        candidate = Scene(obstacles=tuple(boxes) + (Box(lo, hi),), workspace=workspace)
        if config_in_collision(candidate, model, canonical_q):
            continue
        boxes.append(Box(lo, hi))
    return Scene(obstacles=tuple(boxes), workspace=workspace)


def _sample_goal_in_bin(model: RobotModel, q_start: np.ndarray, bin_center: float,
                        rng: np.random.Generator) -> np.ndarray | None:
    """Perturb all joints so the goal lands in the bin's distance band."""
    direction = rng.standard_normal(model.d)
    direction /= np.linalg.norm(direction)
    dist = rng.uniform(bin_center - BIN_BAND, bin_center + BIN_BAND)
    q_goal = q_start + dist * direction
    if not model.in_limits(q_goal):
        return None
    return q_goal


def generate_tasks(model: RobotModel, scene_paths: list[str], out_dir: str,
                   bins=DEFAULT_BINS, per_bin: int = 50, seed: int = 0,
                   rrt_budget: int = 4000, rrt_eps: float = 0.15,
                   camera: Camera | None = None, render_params: RenderParams = RenderParams(),
                   canonical_q: np.ndarray | None = None, max_tries_per_task: int = 200,
                   ) -> str:
    """Build a task manifest: per_bin validated tasks per bin, spread round-robin
    over the scenes. Goal images are rendered and saved as binary graymaps.

    A goal is kept only if it is (a) collision-free, (b) reachable by
    goal-biased RRT within the iteration budget, and (c) inside the bin band.
    Returns the manifest path.
    """
    if not bins:
        raise ValueError("bins must be non-empty")
    if camera is None:
        camera = default_camera(model)
    os.makedirs(out_dir, exist_ok=True)
    img_dir = os.path.join(out_dir, "goals")
    os.makedirs(img_dir, exist_ok=True)
    if canonical_q is None:
        canonical_q = np.zeros(model.d)
    scenes = [Scene.load(p) for p in scene_paths]
    rng = np.random.default_rng(seed)
    tasks: list[BenchTask] = []
    for bin_center in bins:
        for t in range(per_bin):
            scene_idx = t % len(scenes)
            scene = scenes[scene_idx]
            q_goal = None
            for _ in range(max_tries_per_task):
                cand = _sample_goal_in_bin(model, canonical_q, bin_center, rng)
                if cand is None:
                    continue
                if config_in_collision(scene, model, cand):
                    continue
                check = baselines.rrt_plan(scene, model, canonical_q, cand, goal_bias=0.1,
                                           eps=rrt_eps, max_iters=rrt_budget,
                                           seed=int(rng.integers(2 ** 31)))
                if check.termination == "goal":
                    q_goal = cand
                    break
            if q_goal is None:
                raise RuntimeError(
                    f"no valid goal found for bin {bin_center} in scene {scene_idx} "
                    f"after {max_tries_per_task} tries")
            task_id = f"bin{bin_center:.1f}_{t:03d}"
            img_path = os.path.join("goals", f"{task_id}.pgm")
            save_pgm(os.path.join(out_dir, img_path), render(model, q_goal, camera, render_params))
            tasks.append(BenchTask(
                task_id=task_id,
                scene_path=os.path.relpath(scene_paths[scene_idx], out_dir),
                q_start=canonical_q.copy(),
                q_goal=q_goal,
                goal_image_path=img_path,
                bin_center=bin_center,
                seed=int(rng.integers(2 ** 31)),
            ))
    manifest = {
        "robot": model.to_dict(),
        "camera": {"width": camera.width, "height": camera.height, "scale": camera.scale,
                   "offset_x": camera.offset_x, "offset_y": camera.offset_y},
        "render": {"blob_sigma": render_params.blob_sigma, "blob_weight": render_params.blob_weight,
                   "trunc_sigmas": render_params.trunc_sigmas},
        "bins": list(bins),
        "tasks": [t.to_dict() for t in tasks],
    }
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w") as f:
        json.dump(manifest, f, indent=1)
        f.write("\n")
    return manifest_path


def load_manifest(manifest_path: str) -> tuple[RobotModel, Camera, RenderParams, list[BenchTask], str]:
    with open(manifest_path) as f:
        data = json.load(f)
    model = RobotModel.from_dict(data["robot"])
    cam = Camera(**data["camera"])
    rp = RenderParams(**data["render"])
    tasks = [BenchTask.from_dict(t) for t in data["tasks"]]
    return model, cam, rp, tasks, os.path.dirname(os.path.abspath(manifest_path))


def evaluate(result: PlanResult, task: BenchTask, model: RobotModel, camera: Camera,
             render_params: RenderParams, scene: Scene, goal_image: np.ndarray,
             edge_resolution: float = 0.01) -> Metrics:
    """Metrics against the hidden ground-truth goal.

    Success requires mean absolute joint error <= 0.05 rad (inclusive) and a
    collision-free path, re-checked here independently of the planner.
    """
    q_final = np.asarray(result.path[-1], dtype=np.float64)
    per_joint = np.abs(q_final - task.q_goal)
    joint_error = float(per_joint.mean())
    collision_free = result.path_collision_free
    if collision_free:
        for a, b in zip(result.path, result.path[1:]):
            if not edge_collision_free(scene, model, a, b, edge_resolution):
                collision_free = False
                break
    pl = result.path_length
    img = render(model, q_final, camera, render_params)
    return Metrics(
        success=bool(joint_error <= SUCCESS_JOINT_ERROR and collision_free),
        joint_error=joint_error,
        per_joint_errors=per_joint,
        path_length=pl,
        plan_time=result.wall_time,
        psnr_db=psnr(np.clip(img, 0.0, 1.0), goal_image),
    )


def run_planner_on_task(planner_name: str, task: BenchTask, model: RobotModel, camera: Camera,
                        render_params: RenderParams, params: PlannerParams, base_dir: str,
                        noise_sigma: float | None = None) -> tuple[PlanResult, Metrics]:
    """Run one planner on one task and score it. The task seed folds into the
    planner seed so results do not depend on execution order."""
    scene = Scene.load(os.path.join(base_dir, task.scene_path))
    goal_image = load_pgm(os.path.join(base_dir, task.goal_image_path))
    run_params = replace(params, seed=params.seed + task.seed)
    noisy = None
    if noise_sigma is not None:
        noise_rng = np.random.default_rng(task.seed + 9173)
        noisy = task.q_goal + noise_rng.normal(0.0, noise_sigma, size=model.d)
    goal = GoalSpec(goal_image=goal_image, noisy_goal=noisy,
                    noise_sigma=noise_sigma or 0.0)
    if planner_name == "vrrt":
        result = planner_mod.plan(scene, model, task.q_start, goal, run_params, camera, render_params)
    elif planner_name == "gd":
        result = baselines.gradient_only_plan(scene, model, task.q_start, goal, run_params,
                                              camera, render_params)
    elif planner_name == "two-stage":
        result = baselines.two_stage_plan(scene, model, task.q_start, goal, run_params,
                                          camera, render_params)
    elif planner_name == "rrt":
        result = baselines.rrt_plan(scene, model, task.q_start, task.q_goal,
                                    eps=run_params.eps, seed=run_params.seed)
    elif planner_name == "rrt-star":
        result = baselines.rrt_star_plan(scene, model, task.q_start, task.q_goal, run_params)
    else:
        raise ValueError(f"unknown planner {planner_name!r}")
    metrics = evaluate(result, task, model, camera, render_params, scene, goal_image,
                       run_params.edge_resolution)
    return result, metrics


def _bench_job(args):
    planner_name, task_dict, model_dict, cam_dict, rp_dict, params_dict, base_dir, noise_sigma = args
    model = RobotModel.from_dict(model_dict)
    camera = Camera(**cam_dict)
    rp = RenderParams(**rp_dict)
    params = PlannerParams(**params_dict)
    task = BenchTask.from_dict(task_dict)
    result, metrics = run_planner_on_task(planner_name, task, model, camera, rp, params,
                                          base_dir, noise_sigma)
    return {
        "task_id": task.task_id,
        "planner": planner_name,
        "bin": task.bin_center,
        "seed": task.seed,
        "success": int(metrics.success),
        "joint_error": metrics.joint_error,
        "pl": metrics.path_length,
        "time": metrics.plan_time,
        "psnr": metrics.psnr_db,
    }


def run_benchmark(manifest_path: str, planners, params: PlannerParams = PlannerParams(),
                  out_dir: str | None = None, workers: int = 1,
                  noise_sigma: float | None = None) -> list[dict]:
    """Run planners over all manifest tasks; write per-task log and summary.

    Returns the summary rows. Per-task rows are written to per_task.csv and
    bin-aggregated rows to summary.csv, both deterministically ordered.
    """
    model, camera, rp, tasks, base_dir = load_manifest(manifest_path)
    if not tasks:
        rows = []
    else:
        from dataclasses import asdict

        jobs = [(p, t.to_dict(), model.to_dict(),
                 {"width": camera.width, "height": camera.height, "scale": camera.scale,
                  "offset_x": camera.offset_x, "offset_y": camera.offset_y},
                 {"blob_sigma": rp.blob_sigma, "blob_weight": rp.blob_weight,
                  "trunc_sigmas": rp.trunc_sigmas},
                 asdict(params), base_dir, noise_sigma)
                for p in planners for t in tasks]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(_bench_job, jobs, chunksize=1))
        else:
            rows = [_bench_job(j) for j in jobs]
    rows.sort(key=lambda r: (r["planner"], r["bin"], r["task_id"]))
    summary = aggregate(rows)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_per_task_log(os.path.join(out_dir, "per_task.csv"), rows)
        write_summary(os.path.join(out_dir, "summary.csv"), summary)
    return summary


PER_TASK_FIELDS = ("task_id", "planner", "bin", "seed", "success", "joint_error", "pl", "time", "psnr")
SUMMARY_FIELDS = ("planner", "bin", "SR", "time_mean", "pl_mean", "n_success", "n_total")


def aggregate(rows: list[dict]) -> list[dict]:
    """Per (planner, bin): SR over all tasks; time/PL averaged over successes only."""
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault((row["planner"], row["bin"]), []).append(row)
    summary = []
    for (planner_name, bin_center) in sorted(groups):
        grp = groups[(planner_name, bin_center)]
        wins = [r for r in grp if r["success"]]
        summary.append({
            "planner": planner_name,
            "bin": bin_center,
            "SR": 100.0 * len(wins) / len(grp),
            "time_mean": float(np.mean([r["time"] for r in wins])) if wins else math.nan,
            "pl_mean": float(np.mean([r["pl"] for r in wins])) if wins else math.nan,
            "n_success": len(wins),
            "n_total": len(grp),
        })
    return summary


def write_per_task_log(path: str, rows: list[dict]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=PER_TASK_FIELDS)
        writer.writeheader()
        for row in rows:
            out = dict(row)
            for key in ("joint_error", "pl", "time", "psnr"):
                out[key] = repr(float(row[key]))
            writer.writerow(out)


def write_summary(path: str, summary: list[dict]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=SUMMARY_FIELDS)
        writer.writeheader()
        for row in summary:
            out = dict(row)
            out["SR"] = f"{row['SR']:.1f}"
            out["time_mean"] = f"{row['time_mean']:.3f}"
            out["pl_mean"] = f"{row['pl_mean']:.4f}"
            writer.writerow(out)


def read_per_task_log(path: str) -> list[dict]:
    rows = []
    with open(path, newline="") as f:
        for raw in csv.DictReader(f):
            rows.append({
                "task_id": raw["task_id"],
                "planner": raw["planner"],
                "bin": float(raw["bin"]),
                "seed": int(raw["seed"]),
                "success": int(raw["success"]),
                "joint_error": float(raw["joint_error"]),
                "pl": float(raw["pl"]),
                "time": float(raw["time"]),
                "psnr": float(raw["psnr"]),
            })
    return rows


def validate_tasks(manifest_path: str, rrt_budget: int = 4000, rrt_eps: float = 0.15) -> None:
    """Independent re-check of the dataset filters; raises on any violation."""
    model, camera, rp, tasks, base_dir = load_manifest(manifest_path)
    for task in tasks:
        scene = Scene.load(os.path.join(base_dir, task.scene_path))
        dist = float(np.linalg.norm(task.q_goal - task.q_start))
        if abs(dist - task.bin_center) > BIN_BAND + 1e-12:
            raise AssertionError(f"{task.task_id}: distance {dist} outside bin band")
        if config_in_collision(scene, model, task.q_goal):
            raise AssertionError(f"{task.task_id}: goal in collision")
        check = baselines.rrt_plan(scene, model, task.q_start, task.q_goal, goal_bias=0.1,
                                   eps=rrt_eps, max_iters=rrt_budget, seed=task.seed)
        if check.termination != "goal":
            raise AssertionError(f"{task.task_id}: goal not RRT-reachable within budget")
