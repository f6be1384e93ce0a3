"""Comparison planners: gradient-only descent, estimate-then-plan, RRT, RRT*."""

from __future__ import annotations

import math
import time

import numpy as np

from . import optim
from .collision import Scene, config_in_collision, edge_collision_free, scene_is_trivially_free
from .kinematics import RobotModel, sample_uniform
from .planner import GoalSpec, PlanResult, PlannerParams, random_steer, shortcut_path
from .rendering import Camera, RenderParams, default_camera, render_loss_grad
from .tree import Tree, zero_state


def gradient_only_plan(scene: Scene, model: RobotModel, q_start: np.ndarray, goal: GoalSpec,
                       params: PlannerParams = PlannerParams(), camera: Camera | None = None,
                       render_params: RenderParams = RenderParams(),
                       check_collisions: bool = True) -> PlanResult:
    """Single-trajectory optimizer descent on the rendering loss from q_start.

    The path is the iterate sequence; termination uses the same plateau rule
    as the tree planner. The result is flagged as colliding if any iterate or
    connecting edge collides (the descent itself is collision-unaware).
    """
    if camera is None:
        camera = default_camera(model)
    q_start = model.check_config(q_start)
    t0 = time.perf_counter()
    opt_params = params.optimizer()
    state = zero_state(model.d, params.strategy)
    q = q_start.copy()
    path = [q.copy()]
    loss, grad = render_loss_grad(model, q, goal.goal_image, camera, render_params)
    trace = [loss]
    prev = loss
    streak = 0
    termination = "max_iters"
    iters = 0
    for iters in range(1, params.max_iters + 1):
        q_new, state = optim.step(q, grad, state, opt_params, model)
        q = q_new
        path.append(q.copy())
        loss, grad = render_loss_grad(model, q, goal.goal_image, camera, render_params)
        trace.append(loss)
        if abs(prev - loss) < params.plateau_eps:
            streak += 1
        else:
            streak = 0
        prev = loss
        if streak >= params.plateau_iters:
            termination = "plateau"
            break

    collision_free = True
    if check_collisions and not scene_is_trivially_free(scene, model):
        for a, b in zip(path, path[1:]):
            if not edge_collision_free(scene, model, a, b, params.edge_resolution):
                collision_free = False
                break
    return PlanResult(
        path=path,
        best_loss=float(trace[-1]),
        best_config=q.copy(),
        iterations=iters,
        node_count=len(path),
        wall_time=time.perf_counter() - t0,
        trace=trace,
        termination=termination,
        path_collision_free=collision_free,
    )


def two_stage_plan(scene: Scene, model: RobotModel, q_start: np.ndarray, goal: GoalSpec,
                   params: PlannerParams = PlannerParams(), camera: Camera | None = None,
                   render_params: RenderParams = RenderParams()) -> PlanResult:
    """Estimate a goal configuration by collision-unaware descent, then RRT* to it."""
    stage1 = gradient_only_plan(scene, model, q_start, goal, params, camera, render_params,
                                check_collisions=False)
    q_hat = stage1.best_config
    t0 = time.perf_counter()
    result = rrt_star_plan(scene, model, q_start, q_hat, params)
    result.best_loss = stage1.best_loss
    result.wall_time = stage1.wall_time + (time.perf_counter() - t0)
    return result


def _goal_planner_loop(scene: Scene, model: RobotModel, q_start: np.ndarray, q_goal: np.ndarray,
                       eps: float, goal_bias: float, max_iters: int, seed: int,
                       resolution: float, rewire: bool, rewire_radius: float,
                       shortcut_attempts: int) -> PlanResult:
    q_start = model.check_config(q_start)
    q_goal = model.check_config(q_goal)
    if config_in_collision(scene, model, q_start) or config_in_collision(scene, model, q_goal):
        raise ValueError("infeasible endpoint configuration")
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    tree = Tree(model.d)
    tree.insert(q_start, None, 0.0, zero_state(model.d))
    goal_id = None
    iters = 0
    if np.linalg.norm(q_goal - q_start) <= eps and \
            edge_collision_free(scene, model, q_start, q_goal, resolution):
        goal_id = 0 if np.array_equal(q_goal, q_start) else \
            tree.insert(q_goal, 0, 0.0, zero_state(model.d))
    for iters in range(1, max_iters + 1):
        if goal_id is not None:
            break
        target = q_goal if rng.random() < goal_bias else sample_uniform(model, rng)
        parent_id = tree.nearest(target)
        child = random_steer(tree.configs[parent_id], target, eps, model)
        if np.array_equal(child, tree.configs[parent_id]):
            continue
        if not edge_collision_free(scene, model, tree.configs[parent_id], child, resolution):
            continue
        nid = tree.insert(child, parent_id, 0.0, zero_state(model.d))
        if rewire:
            nbrs = tree.near_radius(child, rewire_radius)
            tree.rrt_star_rewire(nid, nbrs[nbrs != nid], scene, model, resolution)
        if np.linalg.norm(child - q_goal) <= eps:
            if np.array_equal(child, q_goal):
                goal_id = nid
                break
            if edge_collision_free(scene, model, child, q_goal, resolution):
                goal_id = tree.insert(q_goal, nid, 0.0, zero_state(model.d))
                break
    success = goal_id is not None
    if success:
        raw = tree.path_to_root(goal_id)
        path = shortcut_path(raw, scene, model, resolution, shortcut_attempts, rng)
        termination = "goal"
    else:
        path = [q_start.copy()]
        termination = "budget"
    return PlanResult(
        path=path,
        best_loss=math.nan,
        best_config=path[-1].copy(),
        iterations=iters,
        node_count=len(tree),
        wall_time=time.perf_counter() - t0,
        trace=[],
        termination=termination,
        path_collision_free=success,
    )


def rrt_plan(scene: Scene, model: RobotModel, q_start: np.ndarray, q_goal: np.ndarray,
             goal_bias: float = 0.05, eps: float = 0.04, max_iters: int = 20000,
             seed: int = 0, resolution: float = 0.01) -> PlanResult:
    """Classic goal-biased RRT; succeeds when a node connects to q_goal within eps."""
    return _goal_planner_loop(scene, model, q_start, q_goal, eps, goal_bias, max_iters,
                              seed, resolution, rewire=False, rewire_radius=0.0,
                              shortcut_attempts=0)


def rrt_star_plan(scene: Scene, model: RobotModel, q_start: np.ndarray, q_goal: np.ndarray,
                  params: PlannerParams = PlannerParams(), goal_bias: float = 0.05,
                  max_iters: int = 20000) -> PlanResult:
    """RRT* with rewiring and shortcutting, sharing the vRRT primitives."""
    return _goal_planner_loop(scene, model, q_start, q_goal, params.eps, goal_bias,
                              max_iters, params.seed, params.edge_resolution, rewire=True,
                              rewire_radius=params.rewire_radius_factor * params.eps,
                              shortcut_attempts=max(params.shortcut_attempts, 200))
