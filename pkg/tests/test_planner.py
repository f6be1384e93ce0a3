import numpy as np
import pytest

from vrrt.collision import Box, Scene
from vrrt.kinematics import default_robot
from vrrt.optim import OptimizerParams, fresh_state, step
from vrrt.planner import (
    GoalSpec,
    PlannerParams,
    PlanResult,
    load_result,
    plan,
    random_steer,
    shortcut_path,
)
from vrrt.rendering import RenderParams, default_camera, render, render_loss


@pytest.fixture(scope="module")
def setup():
    model = default_robot()
    camera = default_camera(model)
    rp = RenderParams()
    return model, camera, rp


def goal_from(model, camera, rp, q_goal):
    return GoalSpec(goal_image=render(model, q_goal, camera, rp))


class TestParams:
    def test_defaults(self):
        p = PlannerParams()
        assert p.eps == 0.04 and p.alpha == 0.04
        assert p.kappa == 0.9 and p.frontier_size == 200
        assert p.explore_ratio == 0.3 and p.frontier_ratio == 0.7
        assert p.batch == 32
        assert p.plateau_eps == 1e-4 and p.plateau_iters == 100

    def test_validation(self):
        with pytest.raises(ValueError):
            PlannerParams(explore_ratio=1.5)
        with pytest.raises(ValueError):
            PlannerParams(batch=0)
        with pytest.raises(ValueError):
            PlannerParams(plateau_eps=0.0)


class TestRandomSteer:
    def test_step_size_capped_at_eps(self):
        model = default_robot()
        q = np.zeros(model.d)
        target = np.ones(model.d)
        out = random_steer(q, target, 0.04, model)
        assert np.linalg.norm(out - q) == pytest.approx(0.04)
        # direction preserved
        assert np.allclose(out / np.linalg.norm(out), target / np.linalg.norm(target))

    def test_close_target_reached_exactly(self):
        model = default_robot()
        q = np.zeros(model.d)
        target = np.full(model.d, 0.01)
        np.testing.assert_array_equal(random_steer(q, target, 0.04, model), target)

    def test_result_clamped(self):
        model = default_robot()
        q = model.joint_upper.copy()
        out = random_steer(q, q + 1.0, 0.5, model)
        assert model.in_limits(out)


class TestPlan:
    def test_goal_at_start_terminates_immediately(self, setup):
        model, camera, rp = setup
        q = np.full(model.d, 0.2)
        goal = GoalSpec(goal_image=render(model, q, camera, rp))
        res = plan(Scene(), model, q, goal, PlannerParams(seed=0), camera, rp)
        assert res.best_loss == pytest.approx(0.0, abs=1e-12)
        np.testing.assert_array_equal(res.path[0], q)
        np.testing.assert_allclose(res.path[-1], q)

    def test_reaches_nearby_goal(self, setup):
        model, camera, rp = setup
        q_start = np.zeros(model.d)
        q_goal = np.full(model.d, 0.3)
        res = plan(Scene(), model, q_start, goal_from(model, camera, rp, q_goal),
                   PlannerParams(seed=1), camera, rp)
        assert np.abs(res.path[-1] - q_goal).mean() <= 0.05

    def test_invalid_start_rejected(self, setup):
        model, camera, rp = setup
        goal = goal_from(model, camera, rp, np.zeros(model.d))
        with pytest.raises(ValueError):
            plan(Scene(), model, np.full(model.d + 1, 0.0), goal,
                 PlannerParams(), camera, rp)

    def test_colliding_start_rejected(self, setup):
        model, camera, rp = setup
        scene = Scene(obstacles=(Box(np.array([0.5, -0.1]), np.array([0.8, 0.1])),))
        goal = goal_from(model, camera, rp, np.full(model.d, 0.5))
        with pytest.raises(ValueError):
            plan(scene, model, np.zeros(model.d), goal, PlannerParams(), camera, rp)

    def test_deterministic_under_seed(self, setup):
        model, camera, rp = setup
        q_goal = np.full(model.d, 0.25)
        goal = goal_from(model, camera, rp, q_goal)
        params = PlannerParams(seed=7, max_iters=30, plateau_iters=10)
        a = plan(Scene(), model, np.zeros(model.d), goal, params, camera, rp)
        b = plan(Scene(), model, np.zeros(model.d), goal, params, camera, rp)
        assert a.to_dict() == b.to_dict()

    def test_trace_is_monotone_nonincreasing(self, setup):
        model, camera, rp = setup
        goal = goal_from(model, camera, rp, np.full(model.d, 0.3))
        res = plan(Scene(), model, np.zeros(model.d), goal,
                   PlannerParams(seed=2, max_iters=40, plateau_iters=10), camera, rp)
        trace = np.array(res.trace)
        assert np.all(np.diff(trace) <= 1e-12)

    def test_path_starts_at_start(self, setup):
        model, camera, rp = setup
        goal = goal_from(model, camera, rp, np.full(model.d, 0.3))
        res = plan(Scene(), model, np.zeros(model.d), goal,
                   PlannerParams(seed=3, max_iters=30, plateau_iters=10), camera, rp)
        np.testing.assert_array_equal(res.path[0], np.zeros(model.d))

    def test_max_iters_termination(self, setup):
        model, camera, rp = setup
        goal = goal_from(model, camera, rp, np.full(model.d, 0.4))
        res = plan(Scene(), model, np.zeros(model.d), goal,
                   PlannerParams(seed=4, max_iters=5, plateau_iters=100), camera, rp)
        assert res.termination == "max_iters"
        assert res.iterations == 5

    def test_result_round_trip(self, setup, tmp_path):
        model, camera, rp = setup
        goal = goal_from(model, camera, rp, np.full(model.d, 0.2))
        res = plan(Scene(), model, np.zeros(model.d), goal,
                   PlannerParams(seed=5, max_iters=10, plateau_iters=5), camera, rp)
        path = tmp_path / "result.json"
        res.save(path)
        loaded = load_result(path)
        assert loaded.to_dict() == res.to_dict()

    def test_greedy_reduction_matches_standalone_adam(self, setup):
        """r=0, eta=1, kappa=0, batch=1, empty scene, no rewiring reduces the
        planner to a single Adam chain from the start configuration."""
        model, camera, rp = setup
        q_start = np.zeros(model.d)
        q_goal = np.full(model.d, 0.12)
        goal_img = render(model, q_goal, camera, rp)
        steps = 200
        params = PlannerParams(explore_ratio=0.0, frontier_ratio=1.0, kappa=0.0,
                               batch=1, rewire=False, noisy_goal_bias=0.0,
                               max_iters=steps, plateau_iters=steps + 1,
                               shortcut_attempts=0, seed=0)
        res = plan(Scene(), model, q_start, GoalSpec(goal_image=goal_img),
                   params, camera, rp, keep_tree=True)
        # standalone chain
        from vrrt.rendering import render_loss_grad

        q = q_start.copy()
        state = fresh_state("adam", model.d)
        opt = OptimizerParams()
        chain = [q.copy()]
        for _ in range(steps):
            _, g = render_loss_grad(model, q, goal_img, camera, rp)
            q, state = step(q, g, state, opt, model)
            chain.append(q.copy())
        tree = res.tree
        assert len(tree) == steps + 1
        for node_id in range(len(tree)):
            np.testing.assert_allclose(tree.configs[node_id], chain[node_id], atol=1e-12)


class TestShortcut:
    def test_direct_shortcut_in_empty_scene(self):
        model = default_robot()
        rng = np.random.default_rng(0)
        waypoints = [np.zeros(model.d)]
        for _ in range(10):
            waypoints.append(waypoints[-1] + rng.uniform(-0.1, 0.1, model.d))
        before = sum(np.linalg.norm(b - a) for a, b in zip(waypoints, waypoints[1:]))
        out = shortcut_path(waypoints, Scene(), model, attempts=300,
                            rng=np.random.default_rng(1))
        after = sum(np.linalg.norm(b - a) for a, b in zip(out, out[1:]))
        assert after <= before + 1e-12
        np.testing.assert_array_equal(out[0], waypoints[0])
        np.testing.assert_array_equal(out[-1], waypoints[-1])

    def test_blocked_shortcut_keeps_detour(self):
        model = default_robot()
        scene = Scene(obstacles=(Box(np.array([0.5, -0.05]), np.array([0.8, 0.05])),))
        up = np.array([np.pi / 2] + [0.0] * (model.d - 1))
        down = np.array([-np.pi / 2] + [0.0] * (model.d - 1))
        detour = np.array([np.pi] + [0.0] * (model.d - 1))
        path = [up, detour, down]
        out = shortcut_path(path, scene, model, attempts=200,
                            rng=np.random.default_rng(2))
        # the direct edge up->down collides, so the detour must survive
        assert len(out) == 3

    def test_two_point_path_unchanged(self):
        model = default_robot()
        path = [np.zeros(model.d), np.full(model.d, 0.1)]
        out = shortcut_path(path, Scene(), model, attempts=50,
                            rng=np.random.default_rng(3))
        assert len(out) == 2
