import numpy as np
import pytest

from vrrt.frontier import FrontierSet, p_frontier
from vrrt.tree import Tree, zero_state


def tree_with_losses(losses):
    tree = Tree(2)
    tree.insert(np.zeros(2), None, float(losses[0]), zero_state(2))
    for loss in losses[1:]:
        tree.insert(np.random.default_rng(0).random(2), 0, float(loss), zero_state(2))
    return tree


class TestPFrontier:
    @pytest.mark.parametrize("kappa", [0.0, 0.5, 0.9, 0.99])
    @pytest.mark.parametrize("m", [1, 10, 200, 10_000])
    def test_sums_to_one(self, kappa, m):
        total = sum(p_frontier(k, kappa, m) for k in range(m))
        assert abs(total - 1.0) <= 1e-12

    def test_kappa_zero_is_greedy(self):
        assert p_frontier(0, 0.0, 10) == 1.0
        assert all(p_frontier(k, 0.0, 10) == 0.0 for k in range(1, 10))

    def test_closed_form(self):
        kappa, m = 0.9, 200
        for k in (0, 1, 5, 199):
            expected = (1 - kappa) * kappa**k / (1 - kappa**m)
            assert p_frontier(k, kappa, m) == pytest.approx(expected, rel=1e-12)

    def test_monotone_decreasing_in_rank(self):
        probs = [p_frontier(k, 0.9, 50) for k in range(50)]
        assert all(a > b for a, b in zip(probs, probs[1:]))

    def test_rank_out_of_range(self):
        with pytest.raises(ValueError):
            p_frontier(5, 0.9, 5)
        with pytest.raises(ValueError):
            p_frontier(-1, 0.9, 5)

    def test_invalid_kappa(self):
        with pytest.raises(ValueError):
            p_frontier(0, 1.0, 5)
        with pytest.raises(ValueError):
            p_frontier(0, -0.1, 5)


class TestFrontierSet:
    def test_update_matches_sort_then_truncate(self):
        rng = np.random.default_rng(0)
        losses = rng.random(500)
        tree = tree_with_losses(losses)
        fs = FrontierSet(capacity=200)
        fs.update(tree)
        oracle = np.argsort(losses, kind="stable")[:200]
        np.testing.assert_array_equal(fs.ranked, oracle)

    def test_capacity_truncates(self):
        tree = tree_with_losses(np.arange(50.0))
        fs = FrontierSet(capacity=10)
        fs.update(tree)
        assert len(fs) == 10
        np.testing.assert_array_equal(fs.ranked, np.arange(10))

    def test_sample_geometric_tv_distance(self):
        """Empirical rank distribution vs the truncated geometric law."""
        size = 200
        tree = tree_with_losses(np.arange(float(size)))
        fs = FrontierSet(capacity=size, kappa=0.9)
        fs.update(tree)
        rng = np.random.default_rng(42)
        n = 100_000
        counts = np.zeros(size)
        for _ in range(n):
            counts[fs.sample(rng)] += 1
        emp = counts / n
        want = np.array([p_frontier(k, 0.9, size) for k in range(size)])
        tv = 0.5 * np.abs(emp - want).sum()
        assert tv <= 0.02

    def test_greedy_limit_always_rank_zero(self):
        tree = tree_with_losses([3.0, 1.0, 2.0])
        fs = FrontierSet(capacity=10, kappa=0.0)
        fs.update(tree)
        rng = np.random.default_rng(0)
        assert all(fs.sample(rng) == 1 for _ in range(20))

    def test_uniform_policy(self):
        size = 20
        tree = tree_with_losses(np.arange(float(size)))
        fs = FrontierSet(capacity=size, policy="uniform")
        fs.update(tree)
        rng = np.random.default_rng(1)
        counts = np.zeros(size)
        n = 50_000
        for _ in range(n):
            counts[fs.sample(rng)] += 1
        assert np.max(np.abs(counts / n - 1 / size)) < 0.01

    def test_topk_policy(self):
        size = 30
        tree = tree_with_losses(np.arange(float(size)))
        fs = FrontierSet(capacity=size, policy="topk", top_k=5)
        fs.update(tree)
        rng = np.random.default_rng(2)
        samples = {fs.sample(rng) for _ in range(2000)}
        assert samples == set(range(5))

    def test_sample_empty_raises(self):
        fs = FrontierSet()
        with pytest.raises(ValueError):
            fs.sample(np.random.default_rng(0))

    def test_invalid_policy(self):
        with pytest.raises(ValueError):
            FrontierSet(policy="softmax")

    def test_normalization_uses_current_size(self):
        """With fewer nodes than capacity the truncation horizon is the
        actual frontier size, so small frontiers still sample each rank."""
        tree = tree_with_losses([0.0, 1.0])
        fs = FrontierSet(capacity=200, kappa=0.9)
        fs.update(tree)
        rng = np.random.default_rng(3)
        n = 20_000
        counts = np.zeros(2)
        for _ in range(n):
            counts[fs.sample(rng)] += 1
        want0 = p_frontier(0, 0.9, 2)
        assert counts[0] / n == pytest.approx(want0, abs=0.01)
