"""RRT*-style search tree with cached visual losses and per-node optimizer states.

Single rooted tree over configurations. Nodes carry a parent pointer, the
C-space path cost from the root, the cached rendering loss of their
configuration, and an immutable optimizer state. Nearest/near queries run as
vectorized exhaustive scans, which is exact and fast enough at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .collision import Scene, edge_collision_free
from .kinematics import RobotModel


@dataclass(frozen=True)
class OptState:
    """Per-node optimizer state: first/second moments and iteration count."""

    m: np.ndarray
    v: np.ndarray
    i: int
    strategy: str = "adam"

    def __post_init__(self):
        object.__setattr__(self, "m", np.asarray(self.m, dtype=np.float64))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=np.float64))
        if np.any(self.v < 0):
            raise ValueError("second moment must be entrywise non-negative")
        if self.i < 0:
            raise ValueError("iteration step must be non-negative")
        if self.i == 0 and (np.any(self.m != 0) or np.any(self.v != 0)):
            raise ValueError("zero-step state must have zero moments")


def zero_state(d: int, strategy: str = "adam") -> OptState:
    return OptState(m=np.zeros(d), v=np.zeros(d), i=0, strategy=strategy)


@dataclass(frozen=True)
class TreeNode:
    id: int
    q: np.ndarray
    parent: int | None
    cost: float
    loss: float
    opt: OptState


class Tree:
    def __init__(self, d: int, capacity: int = 1024):
        self.d = d
        self._q = np.empty((capacity, d))
        self._parent = np.full(capacity, -1, dtype=np.int64)
        self._cost = np.empty(capacity)
        self._loss = np.empty(capacity)
        self._opt: list[OptState] = []
        self._children: list[list[int]] = []
        self._n = 0

    def __len__(self) -> int:
        return self._n

    @property
    def configs(self) -> np.ndarray:
        """View of all node configurations, shape (len(tree), d)."""
        return self._q[: self._n]

    @property
    def losses(self) -> np.ndarray:
        return self._loss[: self._n]

    @property
    def costs(self) -> np.ndarray:
        return self._cost[: self._n]

    def _grow(self):
        cap = self._q.shape[0] * 2
        self._q = np.concatenate([self._q, np.empty_like(self._q)])
        self._parent = np.concatenate([self._parent, np.full(cap // 2, -1, dtype=np.int64)])
        self._cost = np.concatenate([self._cost, np.empty(cap // 2)])
        self._loss = np.concatenate([self._loss, np.empty(cap // 2)])

    def _check_id(self, node_id: int):
        if not 0 <= node_id < self._n:
            raise KeyError(f"unknown node id {node_id}")

    def node(self, node_id: int) -> TreeNode:
        self._check_id(node_id)
        parent = int(self._parent[node_id])
        return TreeNode(
            id=node_id,
            q=self._q[node_id].copy(),
            parent=None if parent < 0 else parent,
            cost=float(self._cost[node_id]),
            loss=float(self._loss[node_id]),
            opt=self._opt[node_id],
        )

    def insert(self, q: np.ndarray, parent_id: int | None, loss: float, opt_state: OptState) -> int:
        q = np.asarray(q, dtype=np.float64)
        if q.shape != (self.d,):
            raise ValueError(f"configuration has shape {q.shape}, expected ({self.d},)")
        if loss < 0:
            raise ValueError("loss must be non-negative")
        if self._n == 0:
            if parent_id is not None:
                raise KeyError("first insert must be the root (parent None)")
            cost = 0.0
            parent = -1
        else:
            if parent_id is None:
                raise KeyError("tree already has a root")
            self._check_id(parent_id)
            parent = parent_id
            cost = float(self._cost[parent_id] + np.linalg.norm(q - self._q[parent_id]))
        if self._n == self._q.shape[0]:
            self._grow()
        nid = self._n
        self._q[nid] = q
        self._parent[nid] = parent
        self._cost[nid] = cost
        self._loss[nid] = loss
        self._opt.append(opt_state)
        self._children.append([])
        if parent >= 0:
            self._children[parent].append(nid)
        self._n += 1
        return nid

    def nearest(self, q: np.ndarray) -> int:
        """Id of the Euclidean-nearest node; ties broken by lowest id."""
        if self._n == 0:
            raise KeyError("nearest query on empty tree")
        diffs = self._q[: self._n] - np.asarray(q, dtype=np.float64)
        return int(np.argmin(np.einsum("ij,ij->i", diffs, diffs)))

    def near_radius(self, q: np.ndarray, radius: float) -> np.ndarray:
        """Ids of all nodes within distance <= radius, ascending."""
        if radius < 0:
            raise ValueError("radius must be non-negative")
        if self._n == 0:
            return np.empty(0, dtype=np.int64)
        diffs = self._q[: self._n] - np.asarray(q, dtype=np.float64)
        d2 = np.einsum("ij,ij->i", diffs, diffs)
        return np.nonzero(d2 <= radius * radius + 0.0)[0].astype(np.int64)

    def _reparent(self, node_id: int, new_parent: int):
        old = int(self._parent[node_id])
        if old >= 0:
            self._children[old].remove(node_id)
        self._parent[node_id] = new_parent
        self._children[new_parent].append(node_id)
        # refresh costs of the node and all its descendants
        stack = [node_id]
        while stack:
            nid = stack.pop()
            pid = int(self._parent[nid])
            self._cost[nid] = self._cost[pid] + np.linalg.norm(self._q[nid] - self._q[pid])
            stack.extend(self._children[nid])

    def _is_descendant(self, node_id: int, ancestor: int) -> bool:
        nid = node_id
        while nid >= 0:
            if nid == ancestor:
                return True
            nid = int(self._parent[nid])
        return False

    def rrt_star_rewire(self, new_id: int, neighbors, scene: Scene, model: RobotModel,
                        resolution: float = 0.01) -> list[int]:
        """Choose-parent for new_id, then rewire its neighbors through it.

        Returns the ids that were reparented (possibly including new_id).
        Optimizer states are never touched: they capture gradient history,
        not path topology.
        """
        self._check_id(new_id)
        neighbors = [int(n) for n in neighbors if int(n) != new_id]
        changed = []
        q_new = self._q[new_id]
        # (a) choose-parent: best collision-free neighbor edge into new_id
        best_parent = int(self._parent[new_id])
        best_cost = float(self._cost[new_id])
        for nb in sorted(neighbors):
            if self._is_descendant(nb, new_id):
                continue
            cand = float(self._cost[nb] + np.linalg.norm(q_new - self._q[nb]))
            if cand < best_cost and edge_collision_free(scene, model, self._q[nb], q_new, resolution):
                best_cost = cand
                best_parent = nb
        if best_parent != int(self._parent[new_id]):
            self._reparent(new_id, best_parent)
            changed.append(new_id)
        # (b) rewire: route neighbors through new_id when strictly cheaper
        for nb in sorted(neighbors):
            if self._is_descendant(new_id, nb):
                continue
            cand = float(self._cost[new_id] + np.linalg.norm(self._q[nb] - q_new))
            if cand < float(self._cost[nb]) and edge_collision_free(
                    scene, model, q_new, self._q[nb], resolution):
                self._reparent(nb, new_id)
                changed.append(nb)
        return changed

    def path_to_root(self, node_id: int) -> list[np.ndarray]:
        """Configurations from the root to node_id, root first."""
        self._check_id(node_id)
        path = []
        nid = node_id
        while nid >= 0:
            path.append(self._q[nid].copy())
            nid = int(self._parent[nid])
        path.reverse()
        return path

    def export_text(self, path) -> None:
        """One node per line: id, parent, q..., cost, loss, opt.i."""
        with open(path, "w") as f:
            f.write(f"# id parent {' '.join(f'q{j}' for j in range(self.d))} cost loss opt_i\n")
            for nid in range(self._n):
                qs = " ".join(repr(float(v)) for v in self._q[nid])
                f.write(f"{nid} {int(self._parent[nid])} {qs} "
                        f"{float(self._cost[nid])!r} {float(self._loss[nid])!r} {self._opt[nid].i}\n")
