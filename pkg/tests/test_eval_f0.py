"""Tests for F0 MSE / Pearson metrics and contour alignment."""

import numpy as np
import pytest

from dubsynth.evaluation import (
    FlatContourError,
    InsufficientVoicingError,
    f0_mse,
    f0_pearson,
    resample_voiced,
)
from dubsynth.signal.pitch import F0Contour


def contour(values, voiced=None):
    values = np.asarray(values, dtype=float)
    if voiced is None:
        voiced = values > 0
    return F0Contour(np.where(voiced, values, 0.0), np.asarray(voiced, bool), 0.01)


def ramp(start, stop, n=100, noise=None):
    values = np.linspace(start, stop, n)
    if noise is not None:
        values = values + noise
    return contour(values, np.ones(n, bool))


class TestF0Mse:
    def test_identical_contours_zero(self):
        c = ramp(150, 250)
        assert f0_mse(c, c) == 0.0

    def test_constant_offset_squares(self):
        a = contour(np.full(50, 200.0), np.ones(50, bool))
        b = contour(np.full(50, 210.0), np.ones(50, bool))
        assert f0_mse(a, b) == pytest.approx(100.0, abs=1e-9)

    def test_symmetric(self):
        rng = np.random.default_rng(0)
        a = ramp(120, 300, noise=rng.normal(0, 5, 100))
        b = ramp(150, 260, noise=rng.normal(0, 5, 100))
        assert f0_mse(a, b) == pytest.approx(f0_mse(b, a), abs=1e-12)

    def test_zero_iff_aligned_identical(self):
        a = ramp(120, 300)
        b = ramp(120, 301)
        assert f0_mse(a, b) > 0.0

    def test_insufficient_voicing_rejected(self):
        short = contour([200.0, 210.0, 0.0], [True, True, False])
        with pytest.raises(InsufficientVoicingError):
            f0_mse(short, ramp(100, 200))

    def test_handles_different_lengths(self):
        a = ramp(150, 250, n=60)
        b = ramp(150, 250, n=140)
        assert f0_mse(a, b) == pytest.approx(0.0, abs=1e-18)


class TestF0Pearson:
    def test_identical_contours_one(self):
        c = ramp(150, 260)
        assert f0_pearson(c, c) == pytest.approx(1.0, abs=1e-12)

    def test_reflection_is_minus_one(self):
        values = np.linspace(140, 240, 80)
        a = contour(values, np.ones(80, bool))
        b = contour(2 * values.mean() - values, np.ones(80, bool))
        assert f0_pearson(a, b) == pytest.approx(-1.0, abs=1e-9)

    def test_noisy_ramps_match_direct_formula_oracle(self):
        rng = np.random.default_rng(42)
        noise_a = rng.normal(0, 8.0, 100)
        noise_b = rng.normal(0, 8.0, 100)
        a = ramp(120, 280, n=100, noise=noise_a)
        b = ramp(160, 240, n=100, noise=noise_b)
        value = f0_pearson(a, b)
        # direct-formula oracle on the same (identity-resampled) vectors
        x, y = a.f0_hz, b.f0_hz
        xc, yc = x - x.mean(), y - y.mean()
        oracle = float(np.sum(xc * yc) / np.sqrt(np.sum(xc**2) * np.sum(yc**2)))
        assert value == pytest.approx(oracle, abs=1e-9)

    def test_flat_contour_rejected(self):
        flat = contour(np.full(40, 200.0), np.ones(40, bool))
        with pytest.raises(FlatContourError):
            f0_pearson(flat, ramp(100, 200))

    def test_affine_invariance_positive_slope(self):
        rng = np.random.default_rng(5)
        a = ramp(130, 270, noise=rng.normal(0, 4, 100))
        b = ramp(150, 300, noise=rng.normal(0, 4, 100))
        base = f0_pearson(a, b)
        scaled = contour(1.7 * b.f0_hz + 20.0, np.ones(100, bool))
        assert f0_pearson(a, scaled) == pytest.approx(base, abs=1e-12)

    def test_result_in_valid_range(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            a = ramp(100, 400, noise=rng.normal(0, 30, 100))
            b = ramp(400, 100, noise=rng.normal(0, 30, 100))
            assert -1.0 <= f0_pearson(a, b) <= 1.0


class TestResampleVoiced:
    def test_uses_only_voiced_frames(self):
        voiced = np.array([False, True, True, True, True, True, False])
        values = np.array([0.0, 100, 120, 140, 160, 180, 0.0])
        out = resample_voiced(contour(values, voiced), n_points=5)
        assert out[0] == pytest.approx(100.0)
        assert out[-1] == pytest.approx(180.0)

    def test_respects_gap_positions(self):
        # voiced region with a hole: interpolation spans the hole in time
        voiced = np.array([True, True, True, True, False, False, True], dtype=bool)
        values = np.array([100.0, 110.0, 120.0, 130.0, 0, 0, 200.0])
        out = resample_voiced(contour(values, voiced), n_points=7)
        assert out[0] == 100.0 and out[-1] == 200.0

    def test_output_length(self):
        c = ramp(100, 200, n=37)
        assert resample_voiced(c, 100).shape == (100,)
