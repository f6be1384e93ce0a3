"""Loss-ranked frontier set and rank-sampling policies.

The frontier holds the M tree nodes with the lowest cached rendering losses,
ranked ascending. Parent anchors are drawn from it by rank using a truncated
geometric distribution (default), uniformly, or from the top K ranks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .tree import Tree

POLICIES = ("geometric", "uniform", "topk")


def p_frontier(k: int, kappa: float, m: int) -> float:
    """Truncated geometric rank probability (1-kappa) kappa^k / (1 - kappa^M).

    kappa = 0 is the greedy limit: probability 1 at rank 0 (0^0 = 1).
    """
    if not 0 <= k < m:
        raise ValueError(f"rank {k} out of range for M={m}")
    if not 0.0 <= kappa < 1.0:
        raise ValueError("kappa must be in [0, 1)")
    if kappa == 0.0:
        return 1.0 if k == 0 else 0.0
    return (1.0 - kappa) * kappa ** k / (1.0 - kappa ** m)


def _sample_trunc_geometric(kappa: float, size: int, rng: np.random.Generator) -> int:
    """Exact inverse-CDF draw of a rank in [0, size)."""
    if kappa == 0.0 or size == 1:
        return 0
    u = rng.random()
    # smallest k with CDF(k) = (1 - kappa^(k+1)) / (1 - kappa^size) > u
    c = 1.0 - u * (1.0 - kappa ** size)
    k = int(math.floor(math.log(c) / math.log(kappa)))
    return min(max(k, 0), size - 1)


@dataclass
class FrontierSet:
    """Top-M lowest-loss node ids, ascending by (loss, id)."""

    capacity: int = 200
    policy: str = "geometric"
    kappa: float = 0.9
    top_k: int = 10
    ranked: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        if self.policy not in POLICIES:
            raise ValueError(f"unknown frontier policy {self.policy!r}")
        if not 0.0 <= self.kappa < 1.0:
            raise ValueError("kappa must be in [0, 1)")

    def __len__(self) -> int:
        return len(self.ranked)

    def update(self, tree: Tree) -> None:
        """Rebuild the ranking from the tree's cached losses.

        Deterministic: ties in loss break by node id (lexsort is stable).
        """
        if len(tree) == 0:
            raise ValueError("cannot build a frontier from an empty tree")
        losses = tree.losses
        order = np.argsort(losses, kind="stable")
        self.ranked = order[: self.capacity].astype(np.int64)

    def sample(self, rng: np.random.Generator) -> int:
        """Draw a node id by rank. M in the rank distribution is the current size."""
        size = len(self.ranked)
        if size == 0:
            raise ValueError("cannot sample from an empty frontier")
        if self.policy == "geometric":
            k = _sample_trunc_geometric(self.kappa, size, rng)
        elif self.policy == "uniform":
            k = int(rng.integers(size))
        else:  # topk
            k = int(rng.integers(min(self.top_k, size)))
        return int(self.ranked[k])
