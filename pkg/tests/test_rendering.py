import numpy as np
import pytest

from vrrt.kinematics import RobotModel, default_robot, sample_uniform
from vrrt.rendering import (
    Camera,
    RenderParams,
    default_camera,
    load_pgm,
    psnr,
    render,
    render_loss,
    render_loss_grad,
    save_pgm,
)
from vrrt.rendering import _splat


def splat_oracle(centers, weight, sigma, width, height):
    """Dense (untruncated, unshifted) Gaussian splat oracle."""
    ys, xs = np.mgrid[0:height, 0:width]
    img = np.zeros((height, width))
    for cx, cy in centers:
        img += weight * np.exp(-((xs - cx) ** 2 + (ys - cy) ** 2) / (2 * sigma**2))
    return img


class TestRender:
    def test_empty_blob_set_gives_zero_image(self):
        img = np.zeros((8, 8))
        _splat(np.empty((0, 2)), 1.0, 2.0, 6.0, img)
        assert np.all(img == 0.0)

    def test_single_blob_peak_is_weight(self):
        # one blob exactly on a pixel center, far from image borders
        img = np.zeros((32, 32))
        _splat(np.array([[16.0, 16.0]]), 1.0, 2.0, 6.0, img)
        assert img[16, 16] == pytest.approx(1.0, abs=1e-6)

    def test_matches_dense_oracle(self, model, camera):
        rng = np.random.default_rng(0)
        params = RenderParams(blob_sigma=2.0, blob_weight=0.03, trunc_sigmas=12.0)
        for _ in range(5):
            q = sample_uniform(model, rng)
            img = render(model, q, camera, params)
            from vrrt.kinematics import forward_kinematics

            centers = camera.world_to_pixel(forward_kinematics(model, q).blobs)
            oracle = splat_oracle(centers, 0.03, 2.0, camera.width, camera.height)
            np.testing.assert_allclose(img, oracle, atol=1e-6)

    def test_mirror_symmetry(self, model, camera):
        """Mirroring q about the x-axis flips the image vertically (the
        default camera centers the base)."""
        params = RenderParams()
        q = np.array([0.4, -0.3, 0.2, 0.5, -0.1])
        a = render(model, q, camera, params)
        b = render(model, -q, camera, params)
        # pixel row centers are symmetric about (height-1)/2 only when the
        # base maps there; the default camera does this by construction
        np.testing.assert_allclose(a, b[::-1, :], atol=1e-9)

    def test_image_shape_and_dtype(self, model, camera, render_params):
        img = render(model, np.zeros(model.d), camera, render_params)
        assert img.shape == (camera.height, camera.width)
        assert img.dtype == np.float64


class TestRenderLoss:
    def test_identity_goal_gives_zero(self, model, camera, render_params):
        q = np.full(model.d, 0.3)
        goal = render(model, q, camera, render_params)
        assert render_loss(model, q, goal, camera, render_params) == 0.0

    def test_sum_of_squares(self, model, camera, render_params):
        q = np.zeros(model.d)
        goal = render(model, np.full(model.d, 0.2), camera, render_params)
        img = render(model, q, camera, render_params)
        expected = float(np.sum((img - goal) ** 2))
        assert render_loss(model, q, goal, camera, render_params) == pytest.approx(expected, rel=1e-12)

    def test_dimension_mismatch_raises(self, model, camera, render_params):
        with pytest.raises(ValueError):
            render_loss(model, np.zeros(model.d), np.zeros((3, 3)), camera, render_params)


class TestRenderLossGrad:
    def test_zero_at_global_minimum(self, model, camera, render_params):
        q = np.full(model.d, -0.25)
        goal = render(model, q, camera, render_params)
        loss, grad = render_loss_grad(model, q, goal, camera, render_params)
        assert loss == 0.0
        assert np.all(grad == 0.0)

    def test_matches_finite_differences(self, model, camera, render_params):
        rng = np.random.default_rng(7)
        h = 1e-5
        for _ in range(10):
            q = sample_uniform(model, rng)
            goal = render(model, sample_uniform(model, rng), camera, render_params)
            _, grad = render_loss_grad(model, q, goal, camera, render_params)
            for j in range(model.d):
                dq = np.zeros(model.d)
                dq[j] = h
                fd = (render_loss(model, q + dq, goal, camera, render_params)
                      - render_loss(model, q - dq, goal, camera, render_params)) / (2 * h)
                denom = max(abs(fd), abs(grad[j]), 1e-8)
                assert abs(grad[j] - fd) / denom <= 1e-4

    def test_returns_loss_alongside(self, model, camera, render_params):
        q = np.zeros(model.d)
        goal = render(model, np.full(model.d, 0.1), camera, render_params)
        loss, _ = render_loss_grad(model, q, goal, camera, render_params)
        assert loss == pytest.approx(render_loss(model, q, goal, camera, render_params), rel=1e-12)


class TestPsnr:
    def test_identical_images_hit_cap(self):
        a = np.random.default_rng(0).random((16, 16))
        assert psnr(a, a) == 100.0

    def test_known_value(self):
        a = np.zeros((4, 4))
        b = np.full((4, 4), 0.5)
        # MSE = 0.25 -> 10*log10(1/0.25)
        assert psnr(a, b) == pytest.approx(10 * np.log10(4.0), rel=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            psnr(np.zeros((2, 2)), np.zeros((3, 3)))


class TestPgm:
    def test_binary_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(1)
        img = np.round(rng.random((12, 10)) * 255) / 255.0
        path = tmp_path / "img.pgm"
        save_pgm(path, img, binary=True)
        loaded = load_pgm(path)
        np.testing.assert_array_equal(loaded, img)

    def test_ascii_round_trip(self, tmp_path):
        img = np.linspace(0, 1, 16).reshape(4, 4)
        path = tmp_path / "img.pgm"
        save_pgm(path, img, binary=False)
        loaded = load_pgm(path)
        assert np.max(np.abs(loaded - img)) <= 0.5 / 255.0

    def test_values_clamped_to_unit_range(self, tmp_path):
        img = np.array([[-1.0, 2.0]])
        path = tmp_path / "img.pgm"
        save_pgm(path, img)
        loaded = load_pgm(path)
        np.testing.assert_array_equal(loaded, [[0.0, 1.0]])

    def test_default_render_fits_in_unit_range(self, model, camera, render_params):
        # folded arm is the worst-case pile-up; default weight keeps it < 1
        q = model.clamp(np.array([0.0, np.pi, np.pi, np.pi, np.pi]))
        assert render(model, q, camera, render_params).max() < 1.0


class TestCamera:
    def test_world_to_pixel_affine(self):
        cam = Camera(width=64, height=64, scale=10.0, offset_x=32.0, offset_y=32.0)
        np.testing.assert_allclose(cam.world_to_pixel(np.array([0.5, -0.5])), [[37.0, 27.0]])

    def test_default_camera_centers_base(self, model):
        cam = default_camera(model)
        px = cam.world_to_pixel(np.zeros(2))[0]
        np.testing.assert_allclose(px, [(cam.width - 1) / 2, (cam.height - 1) / 2])

    def test_reach_fits_in_frame(self, model):
        cam = default_camera(model)
        for p in ([model.reach, 0], [-model.reach, 0], [0, model.reach], [0, -model.reach]):
            px = cam.world_to_pixel(np.array(p, dtype=float))[0]
            assert -0.5 <= px[0] <= cam.width - 0.5
            assert -0.5 <= px[1] <= cam.height - 0.5
