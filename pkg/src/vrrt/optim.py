"""Per-node optimizer-state update strategies for gradient-steered expansion.

Each strategy maps (parent configuration, gradient, inherited state) to a new
configuration and an updated state. States are immutable values, copied on
inheritance, so branches of the search tree carry independent descent
trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .kinematics import RobotModel
from .tree import OptState, zero_state

STRATEGIES = ("adam", "naive", "momentum", "adagrad", "rmsprop", "lion")


@dataclass(frozen=True)
class OptimizerParams:
    alpha: float = 0.04
    beta1: float = 0.9
    beta2: float = 0.9
    delta: float = 1e-8
    mu: float = 0.9
    strategy: str = "adam"

    def __post_init__(self):
        if self.alpha <= 0 or self.delta <= 0:
            raise ValueError("alpha and delta must be positive")
        for name in ("beta1", "beta2", "mu"):
            val = getattr(self, name)
            if not 0.0 <= val < 1.0:
                raise ValueError(f"{name} must be in [0, 1)")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")


def fresh_state(strategy: str, d: int) -> OptState:
    """Zero moments, zero step count."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return zero_state(d, strategy)


def step(q_p: np.ndarray, grad: np.ndarray, state: OptState, params: OptimizerParams,
         model: RobotModel) -> tuple[np.ndarray, OptState]:
    """One gradient-steered update from q_p; result clamped to joint limits."""
    q_p = model.check_config(q_p)
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != q_p.shape or state.m.shape != q_p.shape:
        raise ValueError("gradient/state dimension mismatch")
    if state.strategy != params.strategy:
        raise ValueError(
            f"state strategy {state.strategy!r} does not match params strategy {params.strategy!r}")
    if not (np.all(np.isfinite(grad)) and np.all(np.isfinite(q_p))):
        raise FloatingPointError("non-finite optimizer input")
    s = params.strategy
    a = params.alpha
    i_new = state.i + 1
    m, v = state.m, state.v
    if s == "adam":
        m_new = params.beta1 * m + (1.0 - params.beta1) * grad
        v_new = params.beta2 * v + (1.0 - params.beta2) * grad * grad
        m_hat = m_new / (1.0 - params.beta1 ** i_new)
        v_hat = v_new / (1.0 - params.beta2 ** i_new)
        q_new = q_p - a * m_hat / (np.sqrt(v_hat) + params.delta)
    elif s == "naive":
        m_new, v_new = m, v
        q_new = q_p - a * grad
    elif s == "momentum":
        # velocity lives in the m slot
        m_new = params.mu * m + (1.0 - params.mu) * grad
        v_new = v
        q_new = q_p - a * m_new
    elif s == "adagrad":
        m_new = m
        v_new = v + grad * grad
        q_new = q_p - a * grad / (np.sqrt(v_new) + params.delta)
    elif s == "rmsprop":
        m_new = m
        v_new = params.beta2 * v + (1.0 - params.beta2) * grad * grad
        q_new = q_p - a * grad / (np.sqrt(v_new) + params.delta)
    else:  # lion
        c = params.beta1 * m + (1.0 - params.beta1) * grad
        q_new = q_p - a * np.sign(c)
        m_new = params.beta2 * m + (1.0 - params.beta2) * grad
        v_new = v
    return model.clamp(q_new), OptState(m=m_new, v=v_new, i=i_new, strategy=s)
