import json
import subprocess
import sys

import numpy as np
import pytest

from vrrt.rendering import load_pgm

CLI = [sys.executable, "-m", "vrrt.cli"]


def run_cli(*args, **kw):
    return subprocess.run(CLI + list(args), capture_output=True, text=True, **kw)


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Scenes + a tiny task manifest produced through the CLI itself."""
    root = tmp_path_factory.mktemp("cli")
    scenes = root / "scenes"
    r = run_cli("gen-scenes", "--out", str(scenes), "--n-scenes", "1",
                "--min-obstacles", "2", "--max-obstacles", "2", "--seed", "5")
    assert r.returncode == 0, r.stderr
    tasks = root / "tasks"
    r = run_cli("gen-tasks", "--scenes", str(scenes), "--out", str(tasks),
                "--bins", "0.5", "--per-bin", "2", "--seed", "5")
    assert r.returncode == 0, r.stderr
    return root, tasks / "manifest.json"


class TestRender:
    def test_writes_valid_pgm(self, tmp_path):
        out = tmp_path / "pose.pgm"
        r = run_cli("render", "--q", "0,0,0,0,0", "--out", str(out))
        assert r.returncode == 0, r.stderr
        img = load_pgm(out)
        assert img.shape == (64, 64)
        assert img.max() > 0.0

    def test_bad_q_exits_nonzero(self, tmp_path):
        r = run_cli("render", "--q", "0,0", "--out", str(tmp_path / "x.pgm"))
        assert r.returncode != 0
        assert r.stderr.strip()


class TestGradcheck:
    def test_passes_at_default_tolerance(self):
        r = run_cli("gradcheck", "--cases", "5", "--seed", "0")
        assert r.returncode == 0, r.stderr
        assert "max relative error" in r.stdout

    def test_fails_at_absurd_tolerance(self):
        r = run_cli("gradcheck", "--cases", "5", "--seed", "0", "--tol", "1e-300")
        assert r.returncode == 1


class TestGenPipeline:
    def test_manifest_exists_and_parses(self, workspace):
        _, manifest = workspace
        data = json.loads(manifest.read_text())
        assert len(data["tasks"]) == 2

    def test_plan_on_task(self, workspace, tmp_path):
        _, manifest = workspace
        out = tmp_path / "result.json"
        data = json.loads(manifest.read_text())
        task_id = data["tasks"][0]["task_id"]
        r = run_cli("plan", "--manifest", str(manifest), "--task-id", task_id,
                    "--planner", "rrt", "--out", str(out))
        assert r.returncode == 0, r.stderr
        result = json.loads(out.read_text())
        assert result["termination"] in ("goal", "budget")

    def test_plan_requires_task(self):
        r = run_cli("plan", "--planner", "rrt")
        assert r.returncode == 1
        assert r.stderr.strip()

    def test_unknown_task_id(self, workspace):
        _, manifest = workspace
        r = run_cli("plan", "--manifest", str(manifest), "--task-id", "nope",
                    "--planner", "rrt")
        assert r.returncode == 1

    def test_bench_rrt(self, workspace, tmp_path):
        _, manifest = workspace
        out = tmp_path / "res"
        r = run_cli("bench", "--manifest", str(manifest), "--planners", "rrt",
                    "--out", str(out))
        assert r.returncode == 0, r.stderr
        assert (out / "summary.csv").exists()
        assert (out / "per_task.csv").exists()

    def test_viz_from_result(self, workspace, tmp_path):
        _, manifest = workspace
        data = json.loads(manifest.read_text())
        task_id = data["tasks"][0]["task_id"]
        result = tmp_path / "r.json"
        r = run_cli("plan", "--manifest", str(manifest), "--task-id", task_id,
                    "--planner", "rrt", "--out", str(result))
        assert r.returncode == 0, r.stderr
        svg = tmp_path / "tree.svg"
        r = run_cli("viz", "--result", str(result), "--mode", "pca",
                    "--out", str(svg))
        assert r.returncode == 0, r.stderr
        assert "<svg" in svg.read_text()


class TestConfigPrecedence:
    def test_flag_overrides_config(self, workspace, tmp_path):
        _, manifest = workspace
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"max_iters": 3, "seed": 1}))
        data = json.loads(manifest.read_text())
        task_id = data["tasks"][0]["task_id"]
        out = tmp_path / "r.json"
        r = run_cli("plan", "--manifest", str(manifest), "--task-id", task_id,
                    "--planner", "vrrt", "--config", str(cfg),
                    "--max-iters", "2", "--plateau-iters", "99",
                    "--out", str(out))
        assert r.returncode == 0, r.stderr
        result = json.loads(out.read_text())
        assert result["iterations"] <= 2

    def test_unknown_config_key_rejected(self, workspace, tmp_path):
        _, manifest = workspace
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"not_a_param": 1}))
        data = json.loads(manifest.read_text())
        task_id = data["tasks"][0]["task_id"]
        r = run_cli("plan", "--manifest", str(manifest), "--task-id", task_id,
                    "--config", str(cfg))
        assert r.returncode == 1

    def test_usage_error_exit_code_two(self):
        r = run_cli("plan", "--planner", "warp-drive")
        assert r.returncode == 2
