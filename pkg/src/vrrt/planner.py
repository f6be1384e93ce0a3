"""Visual-goal planner main loop.

Each iteration expands a batch of candidate children. Per attempt, the mode
(explore vs exploit) and the anchor (frontier vs uniform) are drawn
independently: exploration random-steers from the node nearest a target
configuration, exploitation takes one optimizer step along the rendering-loss
gradient at the anchor node, inheriting its optimizer state. The tree keeps
every surviving child; planning stops when the best tree loss plateaus.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, asdict, replace

import numpy as np

from . import optim
from .collision import Scene, config_in_collision, edge_collision_free, scene_is_trivially_free
from .frontier import FrontierSet
from .kinematics import RobotModel, sample_ball, sample_uniform
from .rendering import Camera, RenderParams, default_camera, render_loss, render_loss_grad
from .tree import Tree, zero_state


@dataclass(frozen=True)
class PlannerParams:
    eps: float = 0.04               # random steering step (rad)
    alpha: float = 0.04             # gradient step size
    beta1: float = 0.9
    beta2: float = 0.9
    delta: float = 1e-8
    mu: float = 0.9                 # momentum coefficient (momentum strategy)
    kappa: float = 0.9              # frontier geometric parameter
    frontier_size: int = 200
    frontier_policy: str = "geometric"
    top_k: int = 10
    rho: float = 0.7                # exploration ball radius (rad)
    explore_ratio: float = 0.3      # r: probability an attempt explores
    frontier_ratio: float = 0.7     # eta: probability the anchor is a frontier node
    batch: int = 32
    plateau_eps: float = 1e-4
    plateau_iters: int = 100
    max_iters: int = 250
    rewire: bool = True
    rewire_radius_factor: float = 3.0
    rewire_max_neighbors: int = 20
    edge_resolution: float = 0.01
    strategy: str = "adam"
    noisy_goal_bias: float = 0.25   # fraction of exploit attempts steered to the noisy goal
    shortcut_attempts: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.eps <= 0 or self.rho <= 0:
            raise ValueError("eps and rho must be positive")
        if not (0.0 <= self.explore_ratio <= 1.0 and 0.0 <= self.frontier_ratio <= 1.0):
            raise ValueError("explore_ratio and frontier_ratio must be in [0, 1]")
        if self.batch < 1 or self.plateau_iters < 1 or self.plateau_eps <= 0:
            raise ValueError("invalid batch/plateau parameters")
        if not 0.0 <= self.noisy_goal_bias <= 1.0:
            raise ValueError("noisy_goal_bias must be in [0, 1]")

    def optimizer(self) -> optim.OptimizerParams:
        return optim.OptimizerParams(alpha=self.alpha, beta1=self.beta1, beta2=self.beta2,
                                     delta=self.delta, mu=self.mu, strategy=self.strategy)


@dataclass(frozen=True)
class GoalSpec:
    """Visual goal, optionally with a noisy goal configuration hint."""

    goal_image: np.ndarray
    noisy_goal: np.ndarray | None = None
    noise_sigma: float = 0.0


@dataclass
class PlanResult:
    path: list[np.ndarray]
    best_loss: float
    best_config: np.ndarray
    iterations: int
    node_count: int
    wall_time: float
    trace: list[float]
    termination: str                 # "plateau" | "max_iters" | "goal" | "budget"
    path_collision_free: bool = True
    tree: Tree | None = None

    @property
    def path_length(self) -> float:
        return float(sum(np.linalg.norm(b - a) for a, b in zip(self.path, self.path[1:])))

    def to_dict(self) -> dict:
        """Deterministic serializable form. Wall time is excluded on purpose:
        repeated runs with one seed must produce byte-identical files."""
        return {
            "path": [[float(v) for v in q] for q in self.path],
            "best_loss": float(self.best_loss),
            "best_config": [float(v) for v in self.best_config],
            "iterations": int(self.iterations),
            "node_count": int(self.node_count),
            "trace": [float(v) for v in self.trace],
            "termination": self.termination,
            "path_collision_free": bool(self.path_collision_free),
        }

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=1)
            f.write("\n")


def load_result(path) -> PlanResult:
    with open(path) as f:
        data = json.load(f)
    return PlanResult(
        path=[np.asarray(q) for q in data["path"]],
        best_loss=data["best_loss"],
        best_config=np.asarray(data["best_config"]),
        iterations=data["iterations"],
        node_count=data["node_count"],
        wall_time=float("nan"),
        trace=data["trace"],
        termination=data["termination"],
        path_collision_free=data["path_collision_free"],
    )


def random_steer(q_p: np.ndarray, q_target: np.ndarray, eps: float, model: RobotModel) -> np.ndarray:
    """Fixed-size step from q_p toward q_target, capped at the target, clamped."""
    q_p = np.asarray(q_p, dtype=np.float64)
    q_target = np.asarray(q_target, dtype=np.float64)
    delta = q_target - q_p
    dist = float(np.linalg.norm(delta))
    if dist == 0.0:
        return model.clamp(q_p.copy())
    if dist <= eps:
        return model.clamp(q_target.copy())
    return model.clamp(q_p + (eps / dist) * delta)


class _Expander:
    """Shared state for one planning run: tree, frontier, and caches."""

    def __init__(self, scene: Scene, model: RobotModel, goal: GoalSpec, params: PlannerParams,
                 camera: Camera, render_params: RenderParams):
        self.scene = scene
        self.model = model
        self.goal = goal
        self.params = params
        self.camera = camera
        self.render_params = render_params
        self.tree = Tree(model.d)
        self.frontier = FrontierSet(capacity=params.frontier_size, policy=params.frontier_policy,
                                    kappa=params.kappa, top_k=params.top_k)
        self.opt_params = params.optimizer()
        self.scene_free = scene_is_trivially_free(scene, model)
        # node id -> id of its (deterministic) gradient-descent child
        self._descent_child: dict[int, int] = {}
        # descent tips whose next step was degenerate or infeasible
        self._blocked: set[int] = set()

    def loss_at(self, q: np.ndarray) -> float:
        return render_loss(self.model, q, self.goal.goal_image, self.camera, self.render_params)

    def child_feasible(self, q_parent: np.ndarray, q_child: np.ndarray) -> bool:
        if self.scene_free:
            return self.model.in_limits(q_child)
        if config_in_collision(self.scene, self.model, q_child):
            return False
        return edge_collision_free(self.scene, self.model, q_parent, q_child,
                                   self.params.edge_resolution)

    def expand_iteration(self, rng: np.random.Generator) -> list[int]:
        """One batch of expansion attempts; returns inserted node ids."""
        p = self.params
        grad_cache: dict[int, np.ndarray] = {}
        inserted = []
        for _ in range(p.batch):
            explore = rng.random() < p.explore_ratio
            use_frontier = rng.random() < p.frontier_ratio
            descent_parent = None
            if explore:
                if use_frontier:
                    anchor_q = self.tree.configs[self.frontier.sample(rng)]
                    target = sample_ball(self.model, anchor_q, p.rho, rng)
                else:
                    target = sample_uniform(self.model, rng)
                parent_id = self.tree.nearest(target)
                child = random_steer(self.tree.configs[parent_id], target, p.eps, self.model)
                child_state = zero_state(self.model.d, p.strategy)
            else:
                if use_frontier:
                    parent_id = self.frontier.sample(rng)
                else:
                    parent_id = self.tree.nearest(sample_uniform(self.model, rng))
                parent_q = self.tree.configs[parent_id].copy()
                if self.goal.noisy_goal is not None and rng.random() < p.noisy_goal_bias:
                    child = random_steer(parent_q, self.goal.noisy_goal, p.eps, self.model)
                    child_state = zero_state(self.model.d, p.strategy)
                else:
                    # The gradient step from a fixed node is deterministic, so
                    # re-sampling a node whose descent child already exists would
                    # just clone it.  Instead, advance to the tip of the recorded
                    # descent chain and continue the trajectory from there; this
                    # keeps descent branches alive even when an oscillating step
                    # temporarily raises their loss out of the frontier.
                    while parent_id in self._descent_child:
                        parent_id = self._descent_child[parent_id]
                    if parent_id in self._blocked:
                        continue
                    parent_q = self.tree.configs[parent_id].copy()
                    grad = grad_cache.get(parent_id)
                    if grad is None:
                        _, grad = render_loss_grad(self.model, parent_q, self.goal.goal_image,
                                                   self.camera, self.render_params)
                        grad_cache[parent_id] = grad
                    child, child_state = optim.step(parent_q, grad, self.tree._opt[parent_id],
                                                    self.opt_params, self.model)
                    descent_parent = parent_id
            parent_q = self.tree.configs[parent_id]
            if np.array_equal(child, parent_q):
                if descent_parent is not None:
                    self._blocked.add(descent_parent)
                continue
            if not self.child_feasible(parent_q, child):
                # A descent tip whose (deterministic) next step is infeasible
                # stays in the tree for exploration but is never re-tried.
                if descent_parent is not None:
                    self._blocked.add(descent_parent)
                continue
            nid = self.tree.insert(child, parent_id, self.loss_at(child), child_state)
            if descent_parent is not None:
                self._descent_child[descent_parent] = nid
            if p.rewire:
                radius = p.rewire_radius_factor * p.eps
                nbrs = self.tree.near_radius(child, radius)
                nbrs = nbrs[nbrs != nid]
                if nbrs.size > p.rewire_max_neighbors:
                    diffs = self.tree.configs[nbrs] - child
                    order = np.argsort(np.einsum("ij,ij->i", diffs, diffs), kind="stable")
                    nbrs = nbrs[order[: p.rewire_max_neighbors]]
                self.tree.rrt_star_rewire(nid, nbrs, self.scene, self.model, p.edge_resolution)
            inserted.append(nid)
        self.frontier.update(self.tree)
        return inserted


def shortcut_path(path: list[np.ndarray], scene: Scene, model: RobotModel,
                  resolution: float = 0.01, attempts: int = 100,
                  rng: np.random.Generator | None = None) -> list[np.ndarray]:
    """Randomized shortcutting: splice direct collision-free segments.

    Endpoints are preserved and total C-space length never increases.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    path = [np.asarray(q, dtype=np.float64) for q in path]
    for _ in range(attempts):
        n = len(path)
        if n < 3:
            break
        i = int(rng.integers(0, n - 2))
        j = int(rng.integers(i + 2, n))
        direct = float(np.linalg.norm(path[j] - path[i]))
        via = sum(float(np.linalg.norm(path[k + 1] - path[k])) for k in range(i, j))
        if direct < via and edge_collision_free(scene, model, path[i], path[j], resolution):
            path = path[: i + 1] + path[j:]
    return path


def plan(scene: Scene, model: RobotModel, q_start: np.ndarray, goal: GoalSpec,
         params: PlannerParams = PlannerParams(), camera: Camera | None = None,
         render_params: RenderParams = RenderParams(), keep_tree: bool = False) -> PlanResult:
    """Grow the visual-goal tree until the best loss plateaus or max_iters."""
    if camera is None:
        camera = default_camera(model)
    q_start = model.check_config(q_start)
    if not model.in_limits(q_start) or config_in_collision(scene, model, q_start):
        raise ValueError("infeasible start configuration")
    t0 = time.perf_counter()
    rng = np.random.default_rng(params.seed)
    ex = _Expander(scene, model, goal, params, camera, render_params)
    root_loss = ex.loss_at(q_start)
    ex.tree.insert(q_start, None, root_loss, zero_state(model.d, params.strategy))
    ex.frontier.update(ex.tree)

    best = root_loss
    trace = []
    streak = 0
    termination = "max_iters"
    iters = 0
    for iters in range(1, params.max_iters + 1):
        ex.expand_iteration(rng)
        new_best = float(ex.tree.losses.min())
        if best - new_best < params.plateau_eps:
            streak += 1
        else:
            streak = 0
        best = min(best, new_best)
        trace.append(best)
        if streak >= params.plateau_iters:
            termination = "plateau"
            break

    best_id = int(np.argmin(ex.tree.losses))
    raw_path = ex.tree.path_to_root(best_id)
    path = shortcut_path(raw_path, scene, model, params.edge_resolution,
                         params.shortcut_attempts, rng)
    return PlanResult(
        path=path,
        best_loss=float(ex.tree.losses[best_id]),
        best_config=ex.tree.configs[best_id].copy(),
        iterations=iters,
        node_count=len(ex.tree),
        wall_time=time.perf_counter() - t0,
        trace=trace,
        termination=termination,
        path_collision_free=True,
        tree=ex.tree if keep_tree else None,
    )
