"""2D workspace obstacles and configuration/edge feasibility checks.

Obstacles are axis-aligned boxes; links are zero-width segments between
consecutive joint frames. A configuration collides when any link segment
intersects an obstacle or any joint frame leaves the workspace box.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .kinematics import RobotModel, forward_kinematics


@dataclass(frozen=True)
class Box:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=np.float64))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=np.float64))
        if self.lo.shape != (2,) or self.hi.shape != (2,):
            raise ValueError("box corners must be 2D points")
        if np.any(self.lo >= self.hi):
            raise ValueError("box min corner must be strictly below max corner")

    def contains(self, other: "Box") -> bool:
        return bool(np.all(self.lo <= other.lo) and np.all(other.hi <= self.hi))


@dataclass(frozen=True)
class Scene:
    obstacles: tuple[Box, ...] = ()
    workspace: Box = field(default_factory=lambda: Box(np.array([-2.2, -2.2]), np.array([2.2, 2.2])))

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        for box in self.obstacles:
            if not self.workspace.contains(box):
                raise ValueError("obstacle outside workspace bounds")
        arr = np.zeros((len(self.obstacles), 4))
        for i, box in enumerate(self.obstacles):
            arr[i, 0:2] = box.lo
            arr[i, 2:4] = box.hi
        object.__setattr__(self, "_boxes", arr)
        ws = np.concatenate([self.workspace.lo, self.workspace.hi])
        object.__setattr__(self, "_ws", ws)

    def to_dict(self) -> dict:
        return {
            "workspace": [self.workspace.lo.tolist(), self.workspace.hi.tolist()],
            "obstacles": [[b.lo.tolist(), b.hi.tolist()] for b in self.obstacles],
        }

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write("\n")

    @classmethod
    def from_dict(cls, data: dict) -> "Scene":
        unknown = set(data) - {"workspace", "obstacles"}
        if unknown:
            raise ValueError(f"unknown scene keys: {sorted(unknown)}")
        ws = data["workspace"]
        return cls(
            obstacles=tuple(Box(np.asarray(o[0]), np.asarray(o[1])) for o in data.get("obstacles", [])),
            workspace=Box(np.asarray(ws[0]), np.asarray(ws[1])),
        )

    @classmethod
    def load(cls, path) -> "Scene":
        with open(path) as f:
            return cls.from_dict(json.load(f))


@njit(cache=True)
def _segment_hits_box(px, py, qx, qy, lox, loy, hix, hiy):
    """Slab (Liang-Barsky) segment vs AABB intersection test."""
    t0 = 0.0
    t1 = 1.0
    dx = qx - px
    dy = qy - py
    # x slab
    if dx == 0.0:
        if px < lox or px > hix:
            return False
    else:
        ta = (lox - px) / dx
        tb = (hix - px) / dx
        if ta > tb:
            ta, tb = tb, ta
        t0 = max(t0, ta)
        t1 = min(t1, tb)
        if t0 > t1:
            return False
    # y slab
    if dy == 0.0:
        if py < loy or py > hiy:
            return False
    else:
        ta = (loy - py) / dy
        tb = (hiy - py) / dy
        if ta > tb:
            ta, tb = tb, ta
        t0 = max(t0, ta)
        t1 = min(t1, tb)
        if t0 > t1:
            return False
    return True


@njit(cache=True)
def _skeleton_in_collision(joints, boxes, ws):
    n = joints.shape[0]
    for i in range(n):
        x = joints[i, 0]
        y = joints[i, 1]
        if x < ws[0] or y < ws[1] or x > ws[2] or y > ws[3]:
            return True
    for s in range(n - 1):
        px = joints[s, 0]
        py = joints[s, 1]
        qx = joints[s + 1, 0]
        qy = joints[s + 1, 1]
        for b in range(boxes.shape[0]):
            if _segment_hits_box(px, py, qx, qy, boxes[b, 0], boxes[b, 1], boxes[b, 2], boxes[b, 3]):
                return True
    return False


def config_in_collision(scene: Scene, model: RobotModel, q: np.ndarray) -> bool:
    """True iff any link segment hits an obstacle or exits the workspace."""
    joints = forward_kinematics(model, q).joints
    return bool(_skeleton_in_collision(joints, scene._boxes, scene._ws))


def scene_is_trivially_free(scene: Scene, model: RobotModel) -> bool:
    """No obstacles and the workspace contains the whole reach disk of the arm."""
    if scene.obstacles:
        return False
    r = model.reach
    return bool(np.all(scene.workspace.lo <= -r) and np.all(scene.workspace.hi >= r))


def _batch_joints(model: RobotModel, qs: np.ndarray) -> np.ndarray:
    """Joint-frame positions for a batch of configurations, shape (n, d+1, 2)."""
    theta = np.cumsum(qs, axis=1)
    steps = model.link_lengths[None, :, None] * np.stack([np.cos(theta), np.sin(theta)], axis=2)
    joints = np.zeros((qs.shape[0], model.d + 1, 2))
    joints[:, 1:] = np.cumsum(steps, axis=1)
    return joints


@njit(cache=True)
def _any_skeleton_in_collision(batch, boxes, ws):
    for i in range(batch.shape[0]):
        if _skeleton_in_collision(batch[i], boxes, ws):
            return True
    return False


def edge_collision_free(scene: Scene, model: RobotModel, q1: np.ndarray, q2: np.ndarray,
                        resolution: float = 0.01) -> bool:
    """Check the straight C-space segment q1 -> q2 at spacing <= resolution.

    Endpoints included. All interpolated configurations must be within joint
    limits and collision-free. Joint limits form a box, so interior points of
    an in-limit segment are automatically in-limit.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    q1 = model.check_config(q1)
    q2 = model.check_config(q2)
    if not (model.in_limits(q1) and model.in_limits(q2)):
        return False
    dist = float(np.linalg.norm(q2 - q1))
    n = int(math.ceil(dist / resolution)) if dist > 0 else 0
    ts = np.linspace(0.0, 1.0, n + 1)
    qs = q1[None, :] + ts[:, None] * (q2 - q1)[None, :]
    batch = _batch_joints(model, qs)
    return not bool(_any_skeleton_in_collision(batch, scene._boxes, scene._ws))
