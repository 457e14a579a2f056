"""Grayscale conversion, Sobel gradients, patch densities, dynamic ratio."""

import math

import numpy as np
import pytest

from rtprune import (
    DynamicRatioConfig,
    GradientMap,
    InvalidInput,
    PatchGrid,
    dynamic_ratio,
    patch_density,
    sobel_magnitude,
    to_gray,
)

SOBEL_X = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]]
SOBEL_Y = [[1, 2, 1], [0, 0, 0], [-1, -2, -1]]


def sobel_oracle(img):
    """Naive double-loop Sobel magnitude over the interior."""
    h, w = img.shape
    mag = np.zeros((h, w))
    for i in range(1, h - 1):
        for j in range(1, w - 1):
            gx = 0.0
            gy = 0.0
            for di in range(3):
                for dj in range(3):
                    pixel = img[i + di - 1, j + dj - 1]
                    gx += SOBEL_X[di][dj] * pixel
                    gy += SOBEL_Y[di][dj] * pixel
            mag[i, j] = math.sqrt(gx * gx + gy * gy)
    return mag


def density_oracle(img, grid_h, grid_w, tau):
    """Per-patch active-pixel fraction via the double-loop gradients."""
    h, w = img.shape
    ph, pw = h // grid_h, w // grid_w
    mag = sobel_oracle(img)
    rho_k = []
    for gi in range(grid_h):
        for gj in range(grid_w):
            count = 0
            for i in range(gi * ph, (gi + 1) * ph):
                for j in range(gj * pw, (gj + 1) * pw):
                    interior = 1 <= i < h - 1 and 1 <= j < w - 1
                    if interior and mag[i, j] >= tau:
                        count += 1
            rho_k.append(count / (ph * pw))
    return rho_k, math.fsum(rho_k) / len(rho_k)


class TestToGray:
    def test_red_weight(self):
        img = np.zeros((1, 1, 3), dtype=np.uint8)
        img[0, 0] = (255, 0, 0)
        assert to_gray(img)[0, 0] == pytest.approx(0.299)

    def test_equal_channels(self):
        img = np.full((2, 2, 3), 128, dtype=np.uint8)
        assert to_gray(img)[0, 0] == pytest.approx(128.0 / 255.0)

    def test_white(self):
        img = np.full((1, 1, 3), 255, dtype=np.uint8)
        assert to_gray(img)[0, 0] == pytest.approx(1.0)

    def test_empty_rejected(self):
        with pytest.raises(InvalidInput):
            to_gray(np.zeros((0, 4, 3), dtype=np.uint8))

    def test_wrong_dtype_rejected(self):
        with pytest.raises(InvalidInput):
            to_gray(np.zeros((2, 2, 3), dtype=np.float64))

    def test_range(self):
        rng = np.random.default_rng(31)
        img = rng.integers(0, 256, size=(9, 7, 3)).astype(np.uint8)
        gray = to_gray(img)
        assert gray.min() >= 0.0 and gray.max() <= 1.0


class TestSobelMagnitude:
    def test_uniform_is_zero(self):
        grad = sobel_magnitude(np.full((8, 8), 0.5))
        assert np.all(grad.magnitude == 0.0)

    def test_vertical_step(self):
        img = np.zeros((5, 6))
        img[:, 3:] = 1.0
        grad = sobel_magnitude(img)
        # Columns adjacent to the step see the full 1+2+1 column weight.
        assert grad.magnitude[2, 2] == pytest.approx(4.0)
        assert grad.magnitude[2, 3] == pytest.approx(4.0)
        assert grad.magnitude[2, 1] == 0.0

    def test_horizontal_step(self):
        img = np.zeros((6, 5))
        img[3:, :] = 1.0
        grad = sobel_magnitude(img)
        assert grad.magnitude[2, 2] == pytest.approx(4.0)
        assert grad.magnitude[3, 2] == pytest.approx(4.0)

    def test_border_invalid(self):
        grad = sobel_magnitude(np.full((4, 4), 0.25))
        assert not grad.valid[0].any() and not grad.valid[-1].any()
        assert not grad.valid[:, 0].any() and not grad.valid[:, -1].any()
        assert grad.valid[1:-1, 1:-1].all()

    def test_too_small(self):
        with pytest.raises(InvalidInput):
            sobel_magnitude(np.zeros((2, 5)))

    def test_out_of_range_rejected(self):
        with pytest.raises(InvalidInput):
            sobel_magnitude(np.full((4, 4), 2.0))

    def test_matches_double_loop_oracle(self):
        rng = np.random.default_rng(32)
        for _ in range(10):
            img = rng.uniform(0.0, 1.0, size=(16, 16))
            got = sobel_magnitude(img).magnitude
            want = sobel_oracle(img)
            assert np.abs(got - want).max() <= 1e-9


class TestPatchDensity:
    def test_uniform_zero(self):
        grad = sobel_magnitude(np.full((16, 16), 0.7))
        grid = PatchGrid.for_image(16, 16, 4, 4)
        density = patch_density(grad, grid, 0.2)
        assert np.all(density.rho_k == 0.0) and density.rho == 0.0

    def test_single_active_pixel(self):
        magnitude = np.zeros((4, 4))
        magnitude[1, 1] = 0.5
        valid = np.zeros((4, 4), dtype=bool)
        valid[1:-1, 1:-1] = True
        grad = GradientMap(magnitude=magnitude, valid=valid)
        density = patch_density(grad, PatchGrid.for_image(4, 4, 1, 1), 0.2)
        assert density.rho_k.tolist() == [1.0 / 16.0]

    def test_fully_textured_patch(self):
        # Horizontal ramp: every interior pixel has |Gx| = 8/7 >= 0.2,
        # so all 36 interior pixels of the single 8x8 patch are active.
        img = np.tile(np.arange(8.0) / 7.0, (8, 1))
        density = patch_density(sobel_magnitude(img), PatchGrid.for_image(8, 8, 1, 1), 0.2)
        assert density.rho_k.tolist() == [36.0 / 64.0]
        _, rho = density_oracle(img, 1, 1, 0.2)
        assert density.rho == rho

    def test_matches_double_loop_oracle(self):
        rng = np.random.default_rng(33)
        img = rng.uniform(0.0, 1.0, size=(16, 16))
        grid = PatchGrid.for_image(16, 16, 4, 4)
        density = patch_density(sobel_magnitude(img), grid, 0.2)
        rho_k, rho = density_oracle(img, 4, 4, 0.2)
        assert density.rho_k == pytest.approx(rho_k, abs=1e-12)
        assert density.rho == pytest.approx(rho, abs=1e-12)

    def test_grid_mismatch(self):
        grad = sobel_magnitude(np.full((16, 16), 0.5))
        with pytest.raises(InvalidInput):
            patch_density(grad, PatchGrid(grid_h=4, grid_w=4, patch_h=3, patch_w=4), 0.2)

    def test_indivisible_grid(self):
        with pytest.raises(InvalidInput):
            PatchGrid.for_image(16, 16, 5, 4)

    def test_rotation_preserves_mean_density(self):
        rng = np.random.default_rng(34)
        img = rng.uniform(0.0, 1.0, size=(16, 16))
        base = patch_density(sobel_magnitude(img), PatchGrid.for_image(16, 16, 4, 4), 0.2)
        rotated = patch_density(
            sobel_magnitude(np.rot90(img).copy()), PatchGrid.for_image(16, 16, 4, 4), 0.2
        )
        assert sorted(rotated.rho_k.tolist()) == sorted(base.rho_k.tolist())
        assert rotated.rho == pytest.approx(base.rho, abs=1e-12)


class TestDynamicRatio:
    def test_fully_textual(self):
        assert dynamic_ratio(0.9, 1.0) == 0.0

    def test_low_similarity(self):
        assert dynamic_ratio(-0.5, 0.0) == 0.0
        assert dynamic_ratio(0.0, 0.3) == 0.0

    def test_direct_arithmetic(self):
        assert dynamic_ratio(0.8, 0.4) == pytest.approx(0.48)

    def test_r_max_clamp(self):
        assert dynamic_ratio(1.0, 0.0) == 0.5
        assert dynamic_ratio(5.0, 0.0) == 0.5

    def test_monotone(self):
        cfg = DynamicRatioConfig()
        phis = np.linspace(-0.2, 1.2, 29)
        rhos = np.linspace(0.0, 1.0, 31)
        for rho in rhos:
            values = [dynamic_ratio(phi, rho, cfg) for phi in phis]
            assert all(b >= a for a, b in zip(values, values[1:]))
        for phi in phis:
            values = [dynamic_ratio(phi, rho, cfg) for rho in rhos]
            assert all(b <= a for a, b in zip(values, values[1:]))

    def test_bounds(self):
        cfg = DynamicRatioConfig(r_min=0.05, r_max=0.3)
        rng = np.random.default_rng(35)
        for _ in range(200):
            r = dynamic_ratio(rng.uniform(-2, 2), rng.uniform(0, 1), cfg)
            assert 0.05 <= r <= 0.3

    def test_config_validation(self):
        with pytest.raises(InvalidInput):
            DynamicRatioConfig(phi_lo=0.5, phi_hi=0.5)
        with pytest.raises(InvalidInput):
            DynamicRatioConfig(r_min=0.4, r_max=0.3)
        with pytest.raises(InvalidInput):
            DynamicRatioConfig(r_max=1.0)
