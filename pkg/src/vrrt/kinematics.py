"""Planar N-link serial arm: model, forward kinematics, Jacobians, sampling.

Configurations are plain float64 arrays of joint angles (radians). The joint
space is treated as a box (no angle wrap-around) and C-space distance is the
Euclidean norm on joint vectors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class RobotModel:
    """Planar serial arm with revolute joints and box joint limits."""

    link_lengths: np.ndarray
    joint_lower: np.ndarray
    joint_upper: np.ndarray
    blobs_per_link: int = 8

    def __post_init__(self):
        object.__setattr__(self, "link_lengths", np.asarray(self.link_lengths, dtype=np.float64))
        object.__setattr__(self, "joint_lower", np.asarray(self.joint_lower, dtype=np.float64))
        object.__setattr__(self, "joint_upper", np.asarray(self.joint_upper, dtype=np.float64))
        if self.link_lengths.size == 0:
            raise ValueError("link_lengths must be non-empty")
        if np.any(self.link_lengths <= 0):
            raise ValueError("link lengths must be positive")
        d = self.link_lengths.size
        if self.joint_lower.shape != (d,) or self.joint_upper.shape != (d,):
            raise ValueError("joint limits must have one entry per link")
        if np.any(self.joint_lower >= self.joint_upper):
            raise ValueError("joint_lower must be strictly below joint_upper")
        if self.blobs_per_link < 1:
            raise ValueError("blobs_per_link must be >= 1")

    @property
    def d(self) -> int:
        return self.link_lengths.size

    @property
    def reach(self) -> float:
        return float(self.link_lengths.sum())

    def clamp(self, q: np.ndarray) -> np.ndarray:
        return np.clip(q, self.joint_lower, self.joint_upper)

    def in_limits(self, q: np.ndarray) -> bool:
        return bool(np.all(q >= self.joint_lower) and np.all(q <= self.joint_upper))

    def check_config(self, q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=np.float64)
        if q.shape != (self.d,):
            raise ValueError(f"configuration has shape {q.shape}, expected ({self.d},)")
        if not np.all(np.isfinite(q)):
            raise ValueError("configuration contains non-finite values")
        return q

    def to_dict(self) -> dict:
        return {
            "link_lengths": self.link_lengths.tolist(),
            "joint_limits": [[float(lo), float(hi)] for lo, hi in zip(self.joint_lower, self.joint_upper)],
            "blobs_per_link": int(self.blobs_per_link),
        }

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write("\n")

    @classmethod
    def from_dict(cls, data: dict) -> "RobotModel":
        allowed = {"link_lengths", "joint_limits", "blobs_per_link"}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown robot model keys: {sorted(unknown)}")
        limits = np.asarray(data["joint_limits"], dtype=np.float64)
        return cls(
            link_lengths=np.asarray(data["link_lengths"], dtype=np.float64),
            joint_lower=limits[:, 0],
            joint_upper=limits[:, 1],
            blobs_per_link=int(data.get("blobs_per_link", 8)),
        )

    @classmethod
    def load(cls, path) -> "RobotModel":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def default_robot() -> RobotModel:
    """Desk-scale default: 5 links of length 0.4, limits +/- pi, 8 blobs per link."""
    return RobotModel(
        link_lengths=np.full(5, 0.4),
        joint_lower=np.full(5, -math.pi),
        joint_upper=np.full(5, math.pi),
        blobs_per_link=8,
    )


@dataclass(frozen=True)
class SkeletonPoints:
    """Discretized robot body: joint frames plus per-link blob centers.

    ``joints`` has shape (d+1, 2) with the fixed base first; ``blobs`` has
    shape (d * blobs_per_link, 2), grouped by link in order. Blob centers
    interpolate uniformly along each link, exclusive of the segment start and
    inclusive of its end.
    """

    joints: np.ndarray
    blobs: np.ndarray

    @property
    def points(self) -> np.ndarray:
        return np.concatenate([self.joints, self.blobs], axis=0)


def forward_kinematics(model: RobotModel, q: np.ndarray) -> SkeletonPoints:
    """Cumulative-angle forward kinematics from the fixed base at the origin."""
    q = model.check_config(q)
    theta = np.cumsum(q)
    steps = model.link_lengths[:, None] * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    joints = np.zeros((model.d + 1, 2))
    joints[1:] = np.cumsum(steps, axis=0)
    # fractions k/b for k = 1..b: excludes the link start, includes the end
    fr = np.arange(1, model.blobs_per_link + 1) / model.blobs_per_link
    blobs = joints[:-1, None, :] + fr[None, :, None] * steps[:, None, :]
    return SkeletonPoints(joints=joints, blobs=blobs.reshape(-1, 2))


def fk_jacobian(model: RobotModel, q: np.ndarray) -> np.ndarray:
    """Per-point 2 x d partial derivatives of all skeleton points.

    Returns an array of shape (n_points, 2, d) in the same point order as
    ``SkeletonPoints.points``. A point rigidly attached before joint j has a
    zero block; otherwise the block is the perpendicular lever arm
    (-(y_k - y_j), x_k - x_j) about joint j's frame origin.
    """
    sk = forward_kinematics(model, q)
    pts = sk.points
    n = pts.shape[0]
    jac = np.zeros((n, 2, model.d))
    # link index that each point rides on; joint frame k moves with joints < k
    joint_link = np.arange(model.d + 1) - 1
    blob_link = np.repeat(np.arange(model.d), model.blobs_per_link)
    link_of = np.concatenate([joint_link, blob_link])
    origins = sk.joints
    for j in range(model.d):
        moved = link_of >= j
        rel = pts[moved] - origins[j]
        jac[moved, 0, j] = -rel[:, 1]
        jac[moved, 1, j] = rel[:, 0]
    return jac


def blob_jacobian(model: RobotModel, q: np.ndarray) -> np.ndarray:
    """Jacobian blocks for blob centers only, shape (d * blobs_per_link, 2, d)."""
    return fk_jacobian(model, q)[model.d + 1:]


def sample_uniform(model: RobotModel, rng: np.random.Generator) -> np.ndarray:
    """Uniform configuration over the joint-limit box."""
    return rng.uniform(model.joint_lower, model.joint_upper)


def sample_ball(model: RobotModel, center: np.ndarray, rho: float, rng: np.random.Generator) -> np.ndarray:
    """center + u with u uniform on Ball(0, rho), clamped to joint limits.

    Direction is uniform on the sphere; the radius is rho * U^(1/d), which
    gives the r^d radial CDF of a uniform ball sample.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    center = model.check_config(center)
    direction = rng.standard_normal(model.d)
    norm = np.linalg.norm(direction)
    if norm == 0.0:  # pragma: no cover - probability zero
        direction = np.zeros(model.d)
        direction[0] = 1.0
        norm = 1.0
    radius = rho * rng.random() ** (1.0 / model.d)
    return model.clamp(center + direction * (radius / norm))
