import pytest

import numpy as np
from scipy import stats

from depthcontrast.Augment import (CropStatistics, NormalizationStats, RawSample, compose_channels, compose_input,
    crop_center, normalize_sample, random_crop, synchronized_random_crop)
from depthcontrast.Exceptions import InvalidAttributeError, NumericalError, ShapeError

def ramp_sample(height=10, width=10):
    reflectance = np.arange(height * width, dtype=np.float64).reshape(height, width)
    return RawSample("ramp", reflectance, reflectance + 1000.0, label=2)

def test_views_share_the_rectangle():
    sample = ramp_sample()
    for seed in range(20):
        pair = synchronized_random_crop(sample, (4, 4), np.random.default_rng(seed))
        top, left, h, w = pair.crop_rect
        assert pair.view_ref.shape == (3, 4, 4)
        assert np.array_equal(pair.view_ref[0], sample.reflectance[top:top + h, left:left + w])
        assert np.array_equal(pair.view_dep[0] - 1000.0, pair.view_ref[0])
        assert np.array_equal(pair.view_ref[0], pair.view_ref[2])

def test_same_stream_same_crop():
    sample = ramp_sample()
    first = synchronized_random_crop(sample, (5, 3), np.random.default_rng([1, 2, 3]))
    second = synchronized_random_crop(sample, (5, 3), np.random.default_rng([1, 2, 3]))
    assert first.crop_rect == second.crop_rect

def test_crop_positions_are_uniform():
    sample = ramp_sample(64, 64)
    stream = np.random.default_rng(0)
    tops = np.zeros(33)
    lefts = np.zeros(33)
    for _ in range(10000):
        pair = synchronized_random_crop(sample, (32, 32), stream, channels=1)
        top, left, h, w = pair.crop_rect
        assert (h, w) == (32, 32)
        assert np.array_equal(pair.view_ref[0], sample.reflectance[top:top + h, left:left + w])
        assert np.array_equal(pair.view_dep[0], sample.depth[top:top + h, left:left + w])
        tops[top] += 1
        lefts[left] += 1
    assert stats.chisquare(tops).pvalue > 0.01
    assert stats.chisquare(lefts).pvalue > 0.01

def test_small_sample_is_padded():
    sample = RawSample("small", np.ones((3, 5)), np.ones((3, 5)))
    statistics = CropStatistics()
    pair = synchronized_random_crop(sample, (7, 5), np.random.default_rng(0), statistics=statistics)
    assert pair.padded
    assert pair.crop_rect == (0, 0, 7, 5)
    assert statistics.padded == 1
    assert pair.source_rect == (-2, 0, 7, 5)
    # two rows of zeros above, two below
    assert pair.view_ref[0, :, 0].tolist() == [0, 0, 1, 1, 1, 0, 0]

def test_source_rect_maps_to_sample_planes():
    sample = ramp_sample(3, 10)
    pair = synchronized_random_crop(sample, (7, 4), np.random.default_rng(5))
    top, left, h, w = pair.source_rect
    assert top == -2
    assert (h, w) == (7, 4)
    assert np.array_equal(pair.view_ref[0, 2:5], sample.reflectance[:, left:left + w])
    assert not pair.view_ref[0, :2].any()

def test_full_size_crop():
    sample = ramp_sample(6, 6)
    pair = synchronized_random_crop(sample, (6, 6), np.random.default_rng(4))
    assert pair.crop_rect == (0, 0, 6, 6)
    assert pair.source_rect == pair.crop_rect
    assert not pair.padded

def test_random_crop_keeps_label():
    cropped, rect = random_crop(ramp_sample(), (4, 6), np.random.default_rng(2))
    assert cropped.shape == (4, 6)
    assert cropped.label == 2
    assert np.array_equal(cropped.depth - 1000.0, cropped.reflectance)

def test_center_crop():
    cropped = crop_center(ramp_sample(), (4, 4))
    assert cropped.reflectance[0, 0] == 33.0

def test_compose_channels():
    sample = RawSample("s", np.full((2, 2), 5.0), np.full((2, 2), 1.0))
    image = compose_channels(sample)
    assert image.shape == (3, 2, 2)
    assert image[:, 0, 0].tolist() == [1.0, 5.0, 1.0]

def test_input_modes():
    sample = RawSample("s", np.full((2, 2), 5.0), np.full((2, 2), 1.0))
    assert np.all(compose_input(sample, "raw") == 1.0)
    assert np.all(compose_input(sample, "reflectance") == 5.0)
    assert compose_input(sample, "raw", channels=1).shape == (1, 2, 2)
    with pytest.raises(InvalidAttributeError):
        compose_input(sample, "depth_only")
    with pytest.raises(InvalidAttributeError):
        compose_input(sample, "raw_reflectance", channels=1)

def test_normalization_uses_population_std(rng):
    samples = [RawSample(str(i), rng.random((8, 8)), rng.random((8, 8)) * 3.0) for i in range(4)]
    statistics = NormalizationStats.from_samples(samples)
    normalized = [normalize_sample(sample, statistics) for sample in samples]
    reflectance = np.concatenate([sample.reflectance.ravel() for sample in normalized])
    depth = np.concatenate([sample.depth.ravel() for sample in normalized])
    assert reflectance.mean() == pytest.approx(0.0, abs=1e-12)
    assert reflectance.std() == pytest.approx(1.0)
    assert depth.std() == pytest.approx(1.0)
    assert all(sample.normalized for sample in normalized)

def test_constant_modality_is_rejected():
    sample = RawSample("flat", np.ones((4, 4)), np.arange(16.0).reshape(4, 4))
    statistics = NormalizationStats.from_samples([sample])
    with pytest.raises(InvalidAttributeError) as err_wrapper:
        normalize_sample(sample, statistics)
    assert "reflectance" in err_wrapper.value.message

def test_sample_validation():
    with pytest.raises(ShapeError):
        RawSample("s", np.ones((2, 3)), np.ones((3, 2)))
    with pytest.raises(NumericalError):
        RawSample("s", np.ones((2, 2)), -np.ones((2, 2)))
    with pytest.raises(NumericalError):
        RawSample("s", np.full((2, 2), np.inf), np.ones((2, 2)))
    assert RawSample("s", np.ones((2, 2)), -np.ones((2, 2)), normalized=True).normalized
