import numpy as np
import pytest

from uwdepth.image import (
    Image,
    channel_mean,
    equalize_histogram,
    gaussian_blur,
    gaussian_kernel_1d,
    hsv_to_rgb,
    quantile,
    rgb_to_hsv,
)


def _conv2d_replicate(plane, kernel):
    """Direct 2-D convolution oracle with edge replication (slow, obvious)."""
    kh, kw = kernel.shape
    ry, rx = kh // 2, kw // 2
    padded = np.pad(plane, ((ry, ry), (rx, rx)), mode="edge")
    out = np.zeros_like(plane)
    for y in range(plane.shape[0]):
        for x in range(plane.shape[1]):
            out[y, x] = np.sum(padded[y:y + kh, x:x + kw] * kernel)
    return out


class TestImageType:
    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            Image(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((3, 2)))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            Image(np.zeros((0, 2)), np.zeros((0, 2)), np.zeros((0, 2)))

    def test_validate_flags_out_of_range(self):
        img = Image(np.full((2, 2), 1.5), np.zeros((2, 2)), np.zeros((2, 2)))
        with pytest.raises(ValueError):
            img.validate()

    def test_array_round_trip(self):
        rng = np.random.default_rng(0)
        arr = rng.random((5, 7, 3))
        img = Image.from_array(arr)
        assert img.width == 7 and img.height == 5
        assert np.array_equal(img.to_array(), arr)


class TestChannelMean:
    def test_constant_plane(self):
        assert channel_mean(np.full((4, 4), 0.5)) == 0.5

    def test_two_sample_symmetry(self):
        assert channel_mean(np.array([[0.0, 1.0]])) == 0.5

    def test_direct_sum(self):
        p = np.array([[0.2, 0.4], [0.6, 0.8]])
        assert channel_mean(p) == pytest.approx(0.5, abs=1e-12)

    def test_empty_plane_errors(self):
        with pytest.raises(ValueError):
            channel_mean(np.zeros((0, 3)))


class TestQuantile:
    def test_level_zero_is_min(self):
        p = np.array([[0.1, 0.2, 0.3, 0.4]])
        assert quantile(p, 0.0) == 0.1

    def test_level_one_is_max(self):
        p = np.array([[0.1, 0.2, 0.3, 0.4]])
        assert quantile(p, 1.0) == 0.4

    def test_floor_indexing(self):
        # floor(0.5 * 3) = 1 -> second smallest
        p = np.array([[0.1, 0.2, 0.3, 0.4]])
        assert quantile(p, 0.5) == 0.2

    def test_out_of_range_level(self):
        with pytest.raises(ValueError):
            quantile(np.ones((2, 2)), 1.5)

    def test_matches_sort_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            n = rng.integers(1, 50)
            p = rng.random((1, n))
            level = float(rng.random())
            flat = np.sort(p.ravel())
            expect = flat[int(np.floor(level * (n - 1)))]
            assert quantile(p, level) == expect

    def test_extremes_equal_min_max(self):
        rng = np.random.default_rng(7)
        p = rng.random((13, 9))
        assert quantile(p, 0.0) == p.min()
        assert quantile(p, 1.0) == p.max()


class TestHsv:
    def test_pure_red(self):
        img = Image(np.ones((1, 1)), np.zeros((1, 1)), np.zeros((1, 1)))
        hsv = rgb_to_hsv(img)
        assert hsv.h[0, 0] == 0.0
        assert hsv.s[0, 0] == 1.0
        assert hsv.v[0, 0] == 1.0

    def test_gray_has_zero_saturation(self):
        img = Image(*(np.full((1, 1), 0.5),) * 3)
        hsv = rgb_to_hsv(img)
        assert hsv.h[0, 0] == 0.0
        assert hsv.s[0, 0] == 0.0
        assert hsv.v[0, 0] == 0.5

    def test_hexcone_formula(self):
        # (0, 0.5, 1): v=1, c=1, max is blue -> h = 60*((r-g)/c + 4) = 210
        img = Image(np.zeros((1, 1)), np.full((1, 1), 0.5), np.ones((1, 1)))
        hsv = rgb_to_hsv(img)
        assert hsv.h[0, 0] == pytest.approx(210.0, abs=1e-12)
        assert hsv.s[0, 0] == 1.0
        assert hsv.v[0, 0] == 1.0

    def test_round_trip_random_pixels(self):
        rng = np.random.default_rng(123)
        arr = rng.random((20, 50, 3))
        img = Image.from_array(arr)
        back = hsv_to_rgb(rgb_to_hsv(img))
        assert np.max(np.abs(back.to_array() - arr)) < 1e-6

    def test_round_trip_edge_pixels(self):
        # Corners and mid-sector hues of the RGB cube.
        vals = [0.0, 0.5, 1.0]
        pix = [(r, g, b) for r in vals for g in vals for b in vals]
        arr = np.array(pix).reshape(-1, 1, 3)
        img = Image.from_array(arr)
        back = hsv_to_rgb(rgb_to_hsv(img))
        assert np.max(np.abs(back.to_array() - arr)) < 1e-6

    def test_output_ranges(self):
        rng = np.random.default_rng(5)
        img = Image.from_array(rng.random((8, 8, 3)))
        hsv = rgb_to_hsv(img)
        assert hsv.h.min() >= 0.0 and hsv.h.max() < 360.0
        assert hsv.s.min() >= 0.0 and hsv.s.max() <= 1.0
        assert hsv.v.min() >= 0.0 and hsv.v.max() <= 1.0


class TestGaussianBlur:
    def test_constant_plane_fixed_point(self):
        p = np.full((6, 9), 0.37)
        assert np.array_equal(gaussian_blur(p, 1.0, 2), p)

    def test_impulse_matches_kernel_outer_product(self):
        p = np.zeros((11, 11))
        p[5, 5] = 1.0
        out = gaussian_blur(p, 1.3, 2)
        w = gaussian_kernel_1d(1.3, 2)
        expect = np.zeros_like(p)
        expect[3:8, 3:8] = np.outer(w, w)
        assert np.max(np.abs(out - expect)) < 1e-12
        assert out.sum() == pytest.approx(1.0, abs=1e-9)

    def test_interior_mean_preserved(self):
        # All mass away from borders: blur must conserve the total.
        rng = np.random.default_rng(3)
        p = np.zeros((20, 20))
        p[8:12, 8:12] = rng.random((4, 4))
        out = gaussian_blur(p, 1.0, 2)
        assert out.mean() == pytest.approx(p.mean(), abs=1e-9)

    def test_matches_direct_convolution(self):
        rng = np.random.default_rng(11)
        p = rng.random((9, 14))
        for sigma, radius in [(0.6, 1), (1.0, 2), (2.5, 3)]:
            w = gaussian_kernel_1d(sigma, radius)
            expect = _conv2d_replicate(p, np.outer(w, w))
            assert np.max(np.abs(gaussian_blur(p, sigma, radius) - expect)) < 1e-12

    def test_linearity(self):
        rng = np.random.default_rng(13)
        p, q = rng.random((7, 8)), rng.random((7, 8))
        a, b = 0.7, -0.3
        lhs = gaussian_blur(a * p + b * q, 1.0, 2)
        rhs = a * gaussian_blur(p, 1.0, 2) + b * gaussian_blur(q, 1.0, 2)
        assert np.max(np.abs(lhs - rhs)) < 1e-9

    def test_nonpositive_sigma_errors(self):
        with pytest.raises(ValueError):
            gaussian_blur(np.ones((3, 3)), 0.0, 2)

    def test_radius_zero_errors(self):
        with pytest.raises(ValueError):
            gaussian_blur(np.ones((3, 3)), 1.0, 0)


class TestEqualizeHistogram:
    def test_uniform_histogram_is_near_identity(self):
        p = (np.arange(256, dtype=np.float64) / 255.0).reshape(16, 16)
        out = equalize_histogram(p)
        assert np.max(np.abs(out - p)) <= 1.0 / 255.0 + 1e-12

    def test_constant_plane_unchanged(self):
        p = np.full((4, 4), 0.6)
        assert np.array_equal(equalize_histogram(p), p)

    def test_two_level_plane_stretches_to_full_range(self):
        p = np.array([[0.25, 0.25, 0.75, 0.75]])
        out = equalize_histogram(p)
        assert np.array_equal(np.unique(out), [0.0, 1.0])

    def test_monotone(self):
        rng = np.random.default_rng(21)
        p = rng.random((16, 16))
        out = equalize_histogram(p)
        order = np.argsort(p.ravel(), kind="stable")
        mapped = out.ravel()[order]
        assert np.all(np.diff(mapped) >= 0.0)

    def test_output_in_unit_range(self):
        rng = np.random.default_rng(22)
        for _ in range(20):
            p = rng.random((10, 10)) ** rng.uniform(0.3, 3.0)
            out = equalize_histogram(p)
            assert out.min() >= 0.0 and out.max() <= 1.0
            assert np.all(np.isfinite(out))
