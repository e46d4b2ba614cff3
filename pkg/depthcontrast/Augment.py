__all__ = [
    'INPUT_MODES',
    'RawSample',
    'AugmentedPair',
    'NormalizationStats',
    'CropStatistics',
    'synchronized_random_crop',
    'random_crop',
    'crop_center',
    'compose_channels',
    'compose_input',
    'normalize_sample',
]

import logging
import threading

import numpy as np

from .Exceptions import InvalidAttributeError, NumericalError, ShapeError

logger = logging.getLogger(__name__)

INPUT_MODES = ("raw_reflectance", "raw", "reflectance")


class RawSample(object):
    """

    One particle image: a reflectance plane and the matching depth plane.

    Attributes:
        id (str): The sample id (readonly).
        reflectance (numpy.ndarray): The ``H x W`` reflectance plane (readonly).
        depth (numpy.ndarray): The ``H x W`` depth plane, height above the conveyor (readonly).
        label (int): The class index, or ``None`` for unlabeled samples (readonly).
        normalized (bool): Whether the planes have been standardized; the depth of a standardized
            sample may be negative (readonly).

    """

    def __init__(self, id, reflectance, depth, label=None, normalized=False):
        """Initializes the RawSample class.

        Parameters:
            id (str): The sample id.
            reflectance (numpy.ndarray): The reflectance plane.
            depth (numpy.ndarray): The depth plane.
            label (int, optional): The class index in ``0..6``.
            normalized (bool, optional): Whether the planes are standardized.

        Raises:
            AssertionError: If the input parameters are invalid.
            :class:`depthcontrast.Exceptions.ShapeError`: If the planes differ in shape.
            :class:`depthcontrast.Exceptions.NumericalError`: If a plane is not finite or the
                depth of a raw sample is negative.
        """
        assert isinstance(id, str), "`id` is required as a str."
        reflectance = np.asarray(reflectance)
        depth = np.asarray(depth)
        if reflectance.ndim != 2 or reflectance.shape != depth.shape:
            raise ShapeError("reflectance and depth planes must share one H x W shape",
                [reflectance.shape, depth.shape])
        if not (np.all(np.isfinite(reflectance)) and np.all(np.isfinite(depth))):
            raise NumericalError("sample {} holds non-finite values".format(id))
        if not normalized and np.any(depth < 0):
            raise NumericalError("sample {} has depth below the conveyor".format(id))
        self._id = id
        self._reflectance = reflectance
        self._depth = depth
        self._label = None if label is None else int(label)
        self._normalized = bool(normalized)

    def __repr__(self):
        return 'RawSample({!r}, shape={!r}, label={!r})'.format(self._id, self.shape, self._label)

    @property
    def id(self):
        return self._id

    @property
    def reflectance(self):
        return self._reflectance

    @property
    def depth(self):
        return self._depth

    @property
    def label(self):
        return self._label

    @property
    def normalized(self):
        return self._normalized

    @property
    def shape(self):
        return self._depth.shape

    def replace(self, reflectance, depth, normalized=None):
        """Returns a sample with the same id and label and new planes."""
        return RawSample(self._id, reflectance, depth, self._label,
            self._normalized if normalized is None else normalized)


class AugmentedPair(object):
    """

    The two pretraining views of one sample, cut at the same rectangle.

    Attributes:
        view_ref (numpy.ndarray): The ``C x h x w`` reflectance view (readonly).
        view_dep (numpy.ndarray): The ``C x h x w`` depth view (readonly).
        crop_rect (tuple): ``(top, left, h, w)`` in the frame the views were cut from: the sample
            planes, or the zero-padded planes when ``padded`` is set (readonly).
        source_rect (tuple): ``crop_rect`` in the coordinates of the unpadded sample planes; when
            padded, ``top`` or ``left`` is negative and the rectangle reaches past the planes
            (readonly).
        padded (bool): Whether the sample had to be zero-padded first (readonly).

    """

    def __init__(self, view_ref, view_dep, crop_rect, padded=False, offset=(0, 0)):
        self._view_ref = view_ref
        self._view_dep = view_dep
        self._crop_rect = tuple(crop_rect)
        self._padded = padded
        self._offset = tuple(offset)

    def __repr__(self):
        return 'AugmentedPair(crop_rect={!r}, shape={!r})'.format(self._crop_rect, self._view_ref.shape)

    @property
    def view_ref(self):
        return self._view_ref

    @property
    def view_dep(self):
        return self._view_dep

    @property
    def crop_rect(self):
        return self._crop_rect

    @property
    def source_rect(self):
        top, left, h, w = self._crop_rect
        return (top - self._offset[0], left - self._offset[1], h, w)

    @property
    def padded(self):
        return self._padded


class NormalizationStats(object):
    """

    Per-modality scalar mean and standard deviation.

    Attributes:
        reflectance_mean (float): The reflectance mean (readonly).
        reflectance_std (float): The reflectance standard deviation (readonly).
        depth_mean (float): The depth mean (readonly).
        depth_std (float): The depth standard deviation (readonly).

    """

    def __init__(self, reflectance_mean=0.0, reflectance_std=1.0, depth_mean=0.0, depth_std=1.0):
        self._reflectance_mean = float(reflectance_mean)
        self._reflectance_std = float(reflectance_std)
        self._depth_mean = float(depth_mean)
        self._depth_std = float(depth_std)

    def __repr__(self):
        return 'NormalizationStats(reflectance=({:.6g}, {:.6g}), depth=({:.6g}, {:.6g}))'.format(
            self._reflectance_mean, self._reflectance_std, self._depth_mean, self._depth_std)

    @property
    def reflectance_mean(self):
        return self._reflectance_mean

    @property
    def reflectance_std(self):
        return self._reflectance_std

    @property
    def depth_mean(self):
        return self._depth_mean

    @property
    def depth_std(self):
        return self._depth_std

    @classmethod
    def from_samples(cls, samples):
        """Computes the statistics over every pixel of the given samples.

        The standard deviation is the population one, so standardizing the same samples yields
        mean 0 and standard deviation 1 per modality.

        Parameters:
            samples (list): The :class:`RawSample` objects, usually the training split.

        Returns:
            :class:`NormalizationStats`: The statistics.
        """
        samples = list(samples)
        assert len(samples) > 0, "`samples` must not be empty."
        reflectance = np.concatenate([np.asarray(sample.reflectance, dtype=np.float64).ravel() for sample in samples])
        depth = np.concatenate([np.asarray(sample.depth, dtype=np.float64).ravel() for sample in samples])
        return cls(reflectance.mean(), reflectance.std(), depth.mean(), depth.std())

    def to_dict(self):
        return {
            "reflectance": [self._reflectance_mean, self._reflectance_std],
            "depth": [self._depth_mean, self._depth_std],
        }


class CropStatistics(object):
    """

    Counts the crops that needed zero-padding. Safe to share between worker threads.

    Attributes:
        padded (int): The number of padded crops (readonly).

    """

    def __init__(self):
        self._lock = threading.Lock()
        self._padded = 0

    @property
    def padded(self):
        return self._padded

    def record_padding(self, sample_id, shape, size):
        with self._lock:
            self._padded += 1
        logger.debug("zero-padded sample %s from %r to %r", sample_id, shape, size)


def _check_size(size):
    assert len(size) == 2 and all(int(s) >= 1 for s in size), "`size` is required as (h, w)."
    return int(size[0]), int(size[1])


def _pad(sample, size, statistics):
    height, width = sample.shape
    target_h = max(height, size[0])
    target_w = max(width, size[1])
    if (target_h, target_w) == (height, width):
        return sample, None
    if statistics is not None:
        statistics.record_padding(sample.id, sample.shape, size)
    top = (target_h - height) // 2
    left = (target_w - width) // 2
    pad = ((top, target_h - height - top), (left, target_w - width - left))
    return sample.replace(np.pad(sample.reflectance, pad), np.pad(sample.depth, pad)), (top, left)


def _cut(plane, rect):
    top, left, h, w = rect
    return plane[top:top + h, left:left + w]


def _replicate(plane, channels):
    return np.repeat(plane[np.newaxis], channels, axis=0)


def _random_rect(sample, size, stream):
    height, width = sample.shape
    top = int(stream.integers(0, height - size[0] + 1))
    left = int(stream.integers(0, width - size[1] + 1))
    return (top, left, size[0], size[1])


def synchronized_random_crop(sample, size, stream, channels=3, statistics=None):
    """Cuts both planes of a sample at one uniformly drawn rectangle.

    Images smaller than the crop are first zero-padded symmetrically to the crop size; the event is
    counted in ``statistics``.

    Parameters:
        sample (RawSample): The sample.
        size (tuple): The crop ``(h, w)``.
        stream (numpy.random.Generator): The random stream; derive one per sample for replayable
            epochs.
        channels (int, optional): The encoder input channels; each view is replicated to them.
        statistics (CropStatistics, optional): The padding counter.

    Returns:
        :class:`AugmentedPair`: The two views and the rectangle.

    Raises:
        AssertionError: If the input parameters are invalid.

    Example:
        This example draws a 32 x 32 pair from a 64 x 64 sample::

            import numpy as np
            from depthcontrast.Augment import RawSample, synchronized_random_crop

            sample = RawSample("s0", np.ones((64, 64)), np.zeros((64, 64)))
            pair = synchronized_random_crop(sample, (32, 32), np.random.default_rng(0))
            print(pair.crop_rect, pair.view_ref.shape)
    """
    assert isinstance(sample, RawSample), "`sample` is required as a RawSample."
    assert isinstance(stream, np.random.Generator), "`stream` is required as a numpy.random.Generator."
    size = _check_size(size)
    sample, offset = _pad(sample, size, statistics)
    rect = _random_rect(sample, size, stream)
    return AugmentedPair(_replicate(_cut(sample.reflectance, rect), channels),
        _replicate(_cut(sample.depth, rect), channels), rect, offset is not None, offset or (0, 0))


def random_crop(sample, size, stream, statistics=None):
    """Cuts a sample at a uniformly drawn rectangle, keeping both planes together.

    Returns:
        tuple: The cropped :class:`RawSample` and its ``(top, left, h, w)`` rectangle.
    """
    assert isinstance(sample, RawSample), "`sample` is required as a RawSample."
    size = _check_size(size)
    sample, _ = _pad(sample, size, statistics)
    rect = _random_rect(sample, size, stream)
    return sample.replace(_cut(sample.reflectance, rect), _cut(sample.depth, rect)), rect


def crop_center(sample, size, statistics=None):
    """Cuts the central ``h x w`` rectangle of a sample; used at evaluation time.

    Parameters:
        sample (RawSample): The sample.
        size (tuple): The crop ``(h, w)``.
        statistics (CropStatistics, optional): The padding counter.

    Returns:
        :class:`RawSample`: The cropped sample.
    """
    assert isinstance(sample, RawSample), "`sample` is required as a RawSample."
    size = _check_size(size)
    sample, _ = _pad(sample, size, statistics)
    height, width = sample.shape
    rect = ((height - size[0]) // 2, (width - size[1]) // 2, size[0], size[1])
    return sample.replace(_cut(sample.reflectance, rect), _cut(sample.depth, rect))


def compose_channels(sample):
    """Builds the three-channel raw-reflectance-raw image.

    Parameters:
        sample (RawSample): The sample.

    Returns:
        numpy.ndarray: A ``3 x H x W`` array holding depth, reflectance and depth.

    Raises:
        :class:`depthcontrast.Exceptions.ShapeError`: If the planes differ in shape.
    """
    assert isinstance(sample, RawSample), "`sample` is required as a RawSample."
    if sample.reflectance.shape != sample.depth.shape:
        raise ShapeError("planes differ in shape", [sample.reflectance.shape, sample.depth.shape])
    return np.stack([sample.depth, sample.reflectance, sample.depth])


def compose_input(sample, mode="raw_reflectance", channels=3):
    """Builds the downstream classifier input for one of :data:`INPUT_MODES`.

    ``raw`` replicates the depth plane, ``reflectance`` the reflectance plane, and
    ``raw_reflectance`` is :func:`compose_channels`.

    Raises:
        :class:`depthcontrast.Exceptions.InvalidAttributeError`: If the mode is unknown or the
            composition does not fit the channel count.
    """
    if mode == "raw_reflectance":
        if channels != 3:
            raise InvalidAttributeError("`raw_reflectance` input needs 3 channels")
        return compose_channels(sample)
    if mode == "raw":
        return _replicate(sample.depth, channels)
    if mode == "reflectance":
        return _replicate(sample.reflectance, channels)
    raise InvalidAttributeError("unknown input mode {!r}; expected one of {}".format(mode, ", ".join(INPUT_MODES)))


def normalize_sample(sample, stats):
    """Standardizes both planes of a sample as ``(x - mean) / std``.

    The returned sample is marked normalized; its depth may be negative.

    Parameters:
        sample (RawSample): The sample.
        stats (NormalizationStats): Statistics computed on the training split only.

    Returns:
        :class:`RawSample`: The standardized sample, in 64-bit.

    Raises:
        :class:`depthcontrast.Exceptions.InvalidAttributeError`: If a standard deviation is not
            positive; the message names the modality.
    """
    assert isinstance(sample, RawSample), "`sample` is required as a RawSample."
    assert isinstance(stats, NormalizationStats), "`stats` is required as a NormalizationStats."
    for modality, std in (("reflectance", stats.reflectance_std), ("depth", stats.depth_std)):
        if not std > 0:
            raise InvalidAttributeError("{} standard deviation must be positive, got {!r}".format(modality, std))
    reflectance = (np.asarray(sample.reflectance, dtype=np.float64) - stats.reflectance_mean) / stats.reflectance_std
    depth = (np.asarray(sample.depth, dtype=np.float64) - stats.depth_mean) / stats.depth_std
    return sample.replace(reflectance, depth, normalized=True)
