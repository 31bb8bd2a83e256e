"""Tests for frame synthesis and the accidental-subtracted coincidence estimator."""

import numpy as np
import pytest

from qspeckle.errors import DegenerateDistributionError, DimensionError, EstimatorError, ParameterError
from qspeckle.frames import (
    EstimatorConfig,
    FrameStack,
    NoiseParams,
    bin_horizontal,
    bin_map,
    compare_maps,
    estimate_coincidences,
    raw_coincidences,
    synthesize_frames,
)
from qspeckle.statistics import CoincidenceMap, MapMode


def _point_map(n, i, j):
    values = np.zeros((n, n))
    values[i, j] = 1.0
    return CoincidenceMap(values, 10.0)


class TestSynthesis:
    def test_no_pairs_gives_empty_frames(self, anticorrelated_map):
        stack = synthesize_frames(anticorrelated_map, 100, 0.0, seed=1)
        assert stack.n_frames == 100
        assert stack.intensities.sum() == 0

    def test_point_map_places_every_pair(self):
        stack = synthesize_frames(_point_map(8, 3, 5), 50, 2.0, seed=2, poisson_pairs=False)
        assert np.all(stack.intensities[:, 3] == 2)
        assert np.all(stack.intensities[:, 5] == 2)
        assert stack.intensities.sum() == 50 * 4

    def test_total_counts_follow_pair_rate(self, anticorrelated_map):
        n_frames, pairs = 2000, 5.0
        stack = synthesize_frames(anticorrelated_map, n_frames, pairs, seed=3)
        expected = 2 * pairs * n_frames
        assert abs(stack.intensities.sum() - expected) < 3 * 2 * np.sqrt(pairs * n_frames)

    def test_same_seed_same_frames(self, anticorrelated_map):
        noise = NoiseParams(dark_rate=0.05, background_rate=1.0)
        a = synthesize_frames(anticorrelated_map, 200, 3.0, noise, seed=4)
        b = synthesize_frames(anticorrelated_map, 200, 3.0, noise, seed=4)
        np.testing.assert_array_equal(a.intensities, b.intensities)
        assert a.noise == noise

    def test_stack_keeps_map_geometry(self, anticorrelated_map):
        stack = synthesize_frames(anticorrelated_map, 10, 1.0, seed=5)
        assert stack.pitch_um == anticorrelated_map.pitch_um
        assert stack.pixels == anticorrelated_map.count
        assert stack.seed == 5

    def test_all_zero_map_is_degenerate(self):
        with pytest.raises(DegenerateDistributionError, match="all zero"):
            synthesize_frames(CoincidenceMap(np.zeros((8, 8)), 10.0), 10, 1.0)

    def test_negative_pair_rate_raises(self, anticorrelated_map):
        with pytest.raises(ParameterError, match="pairs_per_frame"):
            synthesize_frames(anticorrelated_map, 10, -1.0)

    def test_negative_noise_raises(self):
        with pytest.raises(ParameterError, match="Noise rates"):
            NoiseParams(dark_rate=-0.1)


class TestEstimator:
    def test_hand_computed_example(self):
        stack = FrameStack(np.array([[1, 0], [0, 1], [1, 1]]))
        expected = np.array([[2.0, -0.5], [-0.5, 0.5]])
        np.testing.assert_allclose(raw_coincidences(stack), expected)
        np.testing.assert_allclose(raw_coincidences(stack, chunk_frames=1), expected)

    def test_pair_on_even_frames(self):
        n_frames = 10
        frames = np.zeros((n_frames, 40), dtype=np.int64)
        frames[::2, 5] = 1
        frames[::2, 30] = 1
        raw = raw_coincidences(FrameStack(frames))
        assert raw[5, 30] == n_frames / 2

    def test_static_frames_cancel(self):
        frames = np.tile(np.array([3, 1, 4, 1, 5]), (20, 1))
        raw = raw_coincidences(FrameStack(frames))
        np.testing.assert_allclose(raw, 0.0, atol=1e-9)

    def test_shape_invariant_under_scaling(self, anticorrelated_map):
        stack = synthesize_frames(anticorrelated_map, 300, 4.0, seed=10)
        scaled = FrameStack(stack.intensities * 3)
        cfg = EstimatorConfig(blur_px=1.0, band=2)
        np.testing.assert_allclose(
            estimate_coincidences(scaled, cfg).values,
            9 * estimate_coincidences(stack, cfg).values,
            rtol=1e-9,
            atol=1e-9,
        )

    def test_independent_pixels_have_no_coincidences(self):
        rng = np.random.default_rng(6)
        n_frames = 20000
        stack = FrameStack(rng.poisson(3.0, (n_frames, 16)))
        raw = raw_coincidences(stack)
        off = ~np.eye(16, dtype=bool)
        assert np.mean(np.abs(raw[off])) < 0.02 * n_frames * 9.0
        # The diagonal keeps the shot-noise variance.
        np.testing.assert_allclose(np.diag(raw), n_frames * 3.0, rtol=0.15)

    def test_symmetrize_gives_symmetric_matrix(self, anticorrelated_map):
        stack = synthesize_frames(anticorrelated_map, 500, 4.0, seed=7)
        raw = raw_coincidences(stack, symmetrize=True)
        np.testing.assert_array_equal(raw, raw.T)

    def test_independent_pixels_average_to_zero(self):
        rng = np.random.default_rng(12)
        off = ~np.eye(8, dtype=bool)
        means = np.array([raw_coincidences(FrameStack(rng.poisson(3.0, (2000, 8))))[off].mean() for _ in range(100)])
        standard_error = means.std(ddof=1) / np.sqrt(means.size)
        assert abs(means.mean()) < 3 * standard_error

    def test_one_sided_estimate_is_nearly_symmetric(self):
        cmap = CoincidenceMap(np.fliplr(np.eye(16)), 20.0)
        stack = synthesize_frames(cmap, 50000, 5.0, seed=11)
        raw = raw_coincidences(stack)
        support = cmap.values > 0
        sym = 0.5 * (raw + raw.T)
        asym = 0.5 * (raw - raw.T)
        assert np.linalg.norm(asym[support]) < 0.05 * np.linalg.norm(sym[support])

    def test_cleanup_zeroes_band(self, anticorrelated_map):
        stack = synthesize_frames(anticorrelated_map, 1000, 5.0, seed=8)
        cmap = estimate_coincidences(stack, EstimatorConfig(blur_px=1.0, band=3))
        i = np.arange(cmap.count)
        near = np.abs(i[:, None] - i[None, :]) <= 3
        assert np.all(cmap.values[near] == 0.0)
        assert np.all(cmap.values >= 0.0)
        assert cmap.mode is MapMode.FRAME_ESTIMATE
        assert cmap.n_realizations == 1000

    def test_unclipped_estimate_may_be_negative(self):
        stack = FrameStack(np.array([[1, 0], [0, 1], [1, 1]]))
        cmap = estimate_coincidences(stack, EstimatorConfig(blur_px=0.0, band=0, clip_negatives=False))
        assert cmap.values[0, 1] == pytest.approx(-0.5)

    def test_recovers_ground_truth(self, anticorrelated_map):
        noise = NoiseParams(dark_rate=0.01, background_rate=1.0)
        stack = synthesize_frames(anticorrelated_map, 50000, 5.0, noise, seed=9)
        estimate = estimate_coincidences(stack, EstimatorConfig(blur_px=1.0, band=2))
        comparison = compare_maps(estimate, anticorrelated_map, band=2)
        assert comparison.pearson > 0.8
        assert comparison.band == 2

    def test_invalid_config_raises(self):
        with pytest.raises(ParameterError, match="band"):
            EstimatorConfig(band=-1)
        with pytest.raises(ParameterError, match="blur_px"):
            EstimatorConfig(blur_px=-1.0)


class TestFrameStack:
    def test_single_frame_raises(self):
        with pytest.raises(EstimatorError, match="at least 2 frames"):
            FrameStack(np.ones((1, 4)))

    def test_negative_intensities_rejected(self):
        with pytest.raises(ParameterError, match="non-negative"):
            FrameStack(np.array([[1, -1], [0, 0]]))

    def test_one_dimensional_rejected(self):
        with pytest.raises(DimensionError, match="frame, pixel"):
            FrameStack(np.ones(5))


class TestBinning:
    def test_bin_horizontal_sums_neighbours(self):
        stack = FrameStack(np.arange(16).reshape(2, 8), pitch_um=10.0)
        binned = bin_horizontal(stack, 4)
        np.testing.assert_array_equal(binned.intensities, [[6, 22], [38, 54]])
        assert binned.pitch_um == 40.0
        assert binned.binning == 4

    def test_bin_by_one_is_identity(self):
        stack = FrameStack(np.ones((2, 4)))
        assert bin_horizontal(stack, 1) is stack

    def test_bin_horizontal_needs_divisor(self):
        with pytest.raises(ParameterError, match="Cannot bin"):
            bin_horizontal(FrameStack(np.ones((2, 8))), 3)

    def test_bin_map_sums_blocks(self):
        binned = bin_map(CoincidenceMap(np.ones((4, 4)), 10.0), 2)
        np.testing.assert_array_equal(binned.values, np.full((2, 2), 4.0))
        assert binned.pitch_um == 20.0

    def test_binning_frames_matches_coarse_detector(self, anticorrelated_map):
        cfg = EstimatorConfig(blur_px=1.0, band=2)
        fine = synthesize_frames(anticorrelated_map, 50000, 5.0, seed=13)
        binned = estimate_coincidences(bin_horizontal(fine, 2), cfg)
        native = estimate_coincidences(synthesize_frames(bin_map(anticorrelated_map, 2), 50000, 5.0, seed=14), cfg)
        assert binned.pitch_um == native.pitch_um
        assert compare_maps(binned, native, band=2).pearson > 0.95

def test_compare_maps_shape_mismatch():
    a = CoincidenceMap(np.eye(4), 10.0)
    b = CoincidenceMap(np.eye(8), 10.0)
    with pytest.raises(DimensionError, match="Cannot compare"):
        compare_maps(a, b, band=0)


def test_compare_identical_maps(anticorrelated_map):
    result = compare_maps(anticorrelated_map, anticorrelated_map, band=2)
    assert result.pearson == pytest.approx(1.0)
    assert result.rms == pytest.approx(0.0)
