"""Visual-goal motion planning for planar arms.

An RRT*-style planner whose exploitation signal is the gradient of a
differentiable rendering loss against a goal image, with frontier-ranked
anchor sampling and optimizer-state inheritance along tree branches; plus
gradient-only / two-stage / RRT / RRT* baselines and a benchmark harness.
"""

from .collision import Box, Scene, config_in_collision, edge_collision_free
from .frontier import FrontierSet, p_frontier
from .kinematics import (RobotModel, SkeletonPoints, default_robot, fk_jacobian,
                         forward_kinematics, sample_ball, sample_uniform)
from .optim import OptimizerParams, fresh_state, step
from .planner import (GoalSpec, PlannerParams, PlanResult, plan, random_steer,
                      shortcut_path)
from .rendering import (Camera, RenderParams, default_camera, load_pgm, psnr,
                        render, render_loss, render_loss_grad, save_pgm)
from .tree import OptState, Tree, TreeNode

__version__ = "0.1.0"
