"""SVG export of search trees and workspace path plots."""

from __future__ import annotations

import warnings

import numpy as np

from .collision import Scene
from .kinematics import RobotModel, forward_kinematics
from .tree import Tree


def pca_project(configs: np.ndarray) -> tuple[np.ndarray, int]:
    """Project configurations onto the top-2 principal components.

    Returns (projected (n, 2), rank). For covariance rank < 2 the projection
    falls back to the first two raw coordinates.
    """
    configs = np.asarray(configs, dtype=np.float64)
    centered = configs - configs.mean(axis=0)
    cov = centered.T @ centered / max(len(configs) - 1, 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = evecs[:, order]
    rank = int(np.sum(evals > 1e-12 * max(evals[0], 1e-300)))
    if rank < 2:
        warnings.warn(f"configuration covariance has rank {rank}; "
                      "falling back to raw coordinates", stacklevel=2)
        return configs[:, :2].copy(), rank
    return centered @ evecs[:, :2], rank


def _svg_header(width: float, height: float) -> str:
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
            f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">\n'
            f'<rect width="100%" height="100%" fill="white"/>\n')


def _fit(points: np.ndarray, width: float, height: float, margin: float = 20.0):
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    scale = min((width - 2 * margin) / span[0], (height - 2 * margin) / span[1])

    def to_px(p):
        x = margin + (p[0] - lo[0]) * scale
        y = height - margin - (p[1] - lo[1]) * scale
        return x, y

    return to_px


def export_tree_svg(tree: Tree, path, mode: str = "pca", model: RobotModel | None = None,
                    scene: Scene | None = None, highlight_path=None,
                    frontier_ids=None, width: float = 640.0, height: float = 640.0) -> None:
    """Write the tree as a standalone SVG.

    pca mode plots nodes in the top-2 principal-component plane, colored by
    optimizer step count (or frontier membership when frontier_ids is given).
    workspace mode draws obstacle boxes and arm poses along highlight_path.
    """
    if len(tree) == 0:
        raise ValueError("cannot export an empty tree")
    parts = [_svg_header(width, height)]
    if mode == "pca":
        proj, rank = pca_project(tree.configs)
        if rank < 2:
            import warnings

            warnings.warn("degenerate configuration covariance; plotting raw coordinates")
        to_px = _fit(proj, width, height)
        for nid in range(len(tree)):
            pid = tree.node(nid).parent
            if pid is not None:
                x1, y1 = to_px(proj[nid])
                x2, y2 = to_px(proj[pid])
                parts.append(f'<line x1="{x1:.1f}" y1="{y1:.1f}" x2="{x2:.1f}" y2="{y2:.1f}" '
                             f'stroke="#cccccc" stroke-width="0.5"/>\n')
        frontier = set(int(i) for i in frontier_ids) if frontier_ids is not None else None
        max_i = max(1, max(tree._opt[n].i for n in range(len(tree))))
        for nid in range(len(tree)):
            x, y = to_px(proj[nid])
            if frontier is not None:
                color = "#ff8c00" if nid in frontier else "#999999"
            else:
                t = tree._opt[nid].i / max_i
                color = f"rgb({int(68 + t * 185)},{int(1 + t * 220)},{int(84 - t * 50)})"
            parts.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="1.8" fill="{color}"/>\n')
    elif mode == "workspace":
        if model is None:
            raise ValueError("workspace mode requires a robot model")
        bounds = scene.workspace if scene is not None else None
        ref = np.array([bounds.lo, bounds.hi]) if bounds is not None else \
            np.array([[-model.reach, -model.reach], [model.reach, model.reach]])
        to_px = _fit(ref, width, height)
        if scene is not None:
            for box in scene.obstacles:
                x0, y0 = to_px(box.lo)
                x1, y1 = to_px(box.hi)
                parts.append(f'<rect x="{min(x0, x1):.1f}" y="{min(y0, y1):.1f}" '
                             f'width="{abs(x1 - x0):.1f}" height="{abs(y1 - y0):.1f}" '
                             f'fill="#b0b0b0" fill-opacity="0.8"/>\n')
        poses = highlight_path if highlight_path is not None else [tree.configs[0]]
        n_poses = len(poses)
        for k, q in enumerate(poses):
            joints = forward_kinematics(model, np.asarray(q)).joints
            pts = " ".join(f"{to_px(p)[0]:.1f},{to_px(p)[1]:.1f}" for p in joints)
            t = k / max(n_poses - 1, 1)
            color = f"rgb({int(30 + 200 * t)},{int(60 + 60 * t)},{int(200 - 170 * t)})"
            parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                         f'stroke-width="2"/>\n')
    else:
        raise ValueError(f"unknown export mode {mode!r}")
    parts.append("</svg>\n")
    with open(path, "w") as f:
        f.write("".join(parts))
