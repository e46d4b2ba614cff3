__all__ = [
    'GeneratorConfig',
    'class_counts',
    'render_sample',
    'generate_synthetic_dataset',
]

import logging
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy import ndimage

from ..Exceptions import InvalidConfigError
from .Manifest import CLASS_NAMES, REFERENCE_COUNTS, DatasetManifest, ManifestEntry

logger = logging.getLogger(__name__)

LIGHT = np.array([0.35, 0.25, 0.9]) / np.linalg.norm([0.35, 0.25, 0.9])
CONVEYOR_ALBEDO = 0.15

# albedo, texture amplitude, texture smoothing (pixels)
SURFACES = {
    "Ore1": (0.55, 0.08, 1.0),
    "Ore2": (0.65, 0.12, 1.5),
    "Ore3": (0.75, 0.16, 2.5),
    "Cylindrical": (0.85, 0.03, 4.0),
    "Agglomerated": (0.45, 0.20, 0.7),
}

# particle count range and radius range, in pixels of a 64 pixel image
ORES = {
    "Ore1": ((28, 40), (2.0, 4.0)),
    "Ore2": ((12, 20), (4.0, 7.0)),
    "Ore3": ((5, 9), (7.0, 11.0)),
}

MIXTURES = {
    "Mixed1": ("Ore1", "Ore2"),
    "Mixed2": ("Ore2", "Ore3"),
}


class GeneratorConfig(object):
    """

    The settings of the synthetic dataset generator.

    Attributes:
        scale (float): The factor applied to the class counts of the reference inventory
            (readonly).
        image_size (int): The height and width of every plane (readonly).
        counts (collections.OrderedDict): The number of samples per class (readonly).

    """

    def __init__(self, scale=0.24, image_size=64, counts=None):
        """Initializes the GeneratorConfig class.

        Parameters:
            scale (float, optional): The factor applied to the reference class counts; the default
                yields about 700 samples.
            image_size (int, optional): The plane size, at least 16.
            counts (dict, optional): Explicit per-class counts; overrides ``scale``.

        Raises:
            :class:`depthcontrast.Exceptions.InvalidConfigError`: If the scale, the size or a count
                is invalid.
        """
        if isinstance(scale, bool) or not isinstance(scale, (int, float)) or not scale > 0:
            raise InvalidConfigError("`scale` must be positive, got {!r}".format(scale))
        if isinstance(image_size, bool) or not isinstance(image_size, int) or image_size < 16:
            raise InvalidConfigError("`image_size` must be an integer of at least 16, got {!r}".format(image_size))
        if counts is None:
            counts = class_counts(scale)
        else:
            unknown = set(counts) - set(CLASS_NAMES)
            if unknown:
                raise InvalidConfigError("unknown classes in `counts`: " + ", ".join(sorted(unknown)))
            counts = OrderedDict((name, counts.get(name, 0)) for name in CLASS_NAMES)
        for name, count in counts.items():
            if isinstance(count, bool) or not isinstance(count, int) or count < 1:
                raise InvalidConfigError("class {} needs at least one sample, got {!r}".format(name, count))
        self._scale = float(scale)
        self._image_size = image_size
        self._counts = counts

    def __repr__(self):
        return 'GeneratorConfig({!r})'.format(self.to_dict())

    @property
    def scale(self):
        return self._scale

    @property
    def image_size(self):
        return self._image_size

    @property
    def counts(self):
        return OrderedDict(self._counts)

    @property
    def total(self):
        return sum(self._counts.values())

    def to_dict(self):
        return {"scale": self._scale, "image_size": self._image_size, "counts": dict(self._counts)}

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


def class_counts(scale):
    """Scales the reference inventory, rounding half up and keeping at least one sample per class.

    Returns:
        collections.OrderedDict: Class name to count, in class index order.
    """
    return OrderedDict((name, max(1, int(np.floor(count * scale + 0.5)))) for name, count in REFERENCE_COUNTS.items())


def _sphere_caps(height, grid, rng, count, radii, factor, centers=None):
    yy, xx = grid
    size = xx.shape[0]
    for index in range(count):
        radius = rng.uniform(*radii) * factor
        if centers is None:
            cy, cx = rng.uniform(0, size, 2)
        else:
            cy, cx = centers[index]
        cap = radius ** 2 - (yy - cy) ** 2 - (xx - cx) ** 2
        np.maximum(height, np.sqrt(np.clip(cap, 0.0, None)), out=height)


def _rods(height, grid, rng, count, factor):
    yy, xx = grid
    size = xx.shape[0]
    for _ in range(count):
        radius = rng.uniform(2.0, 4.0) * factor
        half = rng.uniform(size / 6.0, size / 3.0)
        cy, cx = rng.uniform(0, size, 2)
        angle = rng.uniform(0, np.pi)
        along = (yy - cy) * np.sin(angle) + (xx - cx) * np.cos(angle)
        across = -(yy - cy) * np.cos(angle) + (xx - cx) * np.sin(angle)
        profile = np.sqrt(np.clip(radius ** 2 - across ** 2, 0.0, None))
        np.maximum(height, np.where(np.abs(along) <= half, profile, 0.0), out=height)


def _texture(rng, size, amplitude, sigma):
    return amplitude * ndimage.gaussian_filter(rng.standard_normal((size, size)), sigma) * (sigma * 2.0)


def render_sample(class_name, size, rng):
    """Renders one particle image as a height field and its shaded reflectance.

    Ore classes are heaps of sphere caps with increasing radii, ``Cylindrical`` holds rods,
    ``Agglomerated`` clustered blobs, and ``Mixed1``/``Mixed2`` mix particles of two ore classes.
    The reflectance is a Lambertian shading of the height field times a class albedo, plus smoothed
    class texture noise. The depth is the height above the conveyor: its minimum is exactly 0.

    Parameters:
        class_name (str): One of :data:`depthcontrast.Datasets.Manifest.CLASS_NAMES`.
        size (int): The plane size.
        rng (numpy.random.Generator): The per-sample stream.

    Returns:
        tuple: The reflectance and depth planes as ``numpy.float32`` arrays.
    """
    factor = size / 64.0
    grid = np.mgrid[0:size, 0:size].astype(np.float64)
    height = np.zeros((size, size))
    albedo = np.full((size, size), CONVEYOR_ALBEDO)
    texture = np.zeros((size, size))

    if class_name in MIXTURES:
        share = rng.uniform(0.3, 0.7)
        parts = [(MIXTURES[class_name][0], share), (MIXTURES[class_name][1], 1.0 - share)]
    else:
        parts = [(class_name, 1.0)]

    for part, share in parts:
        before = height.copy()
        if part in ORES:
            (low, high), radii = ORES[part]
            count = max(1, int(round(rng.integers(low, high + 1) * share * factor ** 2)))
            _sphere_caps(height, grid, rng, count, radii, factor)
        elif part == "Cylindrical":
            _rods(height, grid, rng, int(rng.integers(3, 7)), factor)
        elif part == "Agglomerated":
            for _ in range(int(rng.integers(2, 4))):
                center = rng.uniform(size * 0.2, size * 0.8, 2)
                members = int(rng.integers(6, 11))
                centers = center + rng.normal(0.0, 4.0 * factor, (members, 2))
                _sphere_caps(height, grid, rng, members, (2.0, 4.5), factor, centers=centers)
        else:
            raise InvalidConfigError("unknown class {!r}".format(class_name))
        surface_albedo, amplitude, sigma = SURFACES[part]
        covered = height > before
        albedo = np.where(covered, surface_albedo, albedo)
        texture = np.where(covered, _texture(rng, size, amplitude, sigma), texture)

    dy, dx = np.gradient(height)
    normals = np.stack([-dx, -dy, np.ones_like(height)])
    normals /= np.linalg.norm(normals, axis=0)
    shading = np.clip(np.tensordot(LIGHT, normals, axes=1), 0.0, None)
    reflectance = np.clip(albedo * shading + texture, 0.0, None)

    depth = height + np.abs(ndimage.gaussian_filter(rng.standard_normal((size, size)), 1.0)) * 0.05
    depth = depth.astype(np.float32)
    depth -= depth.min()
    return reflectance.astype(np.float32), depth


def generate_synthetic_dataset(config, seed, storage, max_workers=4):
    """Renders a complete dataset and writes its plane files and manifest through ``storage``.

    Sample ``i`` is rendered from ``numpy.random.default_rng([seed, i])``, so rendering may run in
    parallel and the output only depends on ``(config, seed)``.

    Parameters:
        config (GeneratorConfig): The generator settings.
        seed (int): The dataset seed.
        storage (depthcontrast.Storage.Storage): The storage rooted at the dataset directory.
        max_workers (int, optional): The number of rendering threads.

    Returns:
        :class:`depthcontrast.Datasets.Manifest.DatasetManifest`: The written manifest.

    Raises:
        AssertionError: If the input parameters are invalid.
    """
    assert isinstance(config, GeneratorConfig), "`config` is required as a GeneratorConfig."
    assert isinstance(seed, int), "`seed` is required as an int."

    jobs = []
    for name, count in config.counts.items():
        for _ in range(count):
            jobs.append((len(jobs), name))

    def render(job):
        index, name = job
        sample_id = "{}-{:05d}".format(name, index)
        reflectance, depth = render_sample(name, config.image_size, np.random.default_rng([seed, index]))
        entry = ManifestEntry(sample_id, name, "planes/{}.reflectance.dpc".format(sample_id),
            "planes/{}.depth.dpc".format(sample_id))
        storage.write_plane(entry.reflectance_path, reflectance)
        storage.write_plane(entry.depth_path, depth)
        return entry

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        entries = list(executor.map(render, jobs))
    manifest = DatasetManifest(entries)
    storage.write_manifest(manifest)
    logger.info("generated %d samples (%s)", len(entries),
        ", ".join("{} {}".format(name, count) for name, count in config.counts.items()))
    return manifest
