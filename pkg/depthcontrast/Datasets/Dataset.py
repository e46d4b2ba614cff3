__all__ = [
    'Dataset',
]

import logging
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor

from ..Augment import NormalizationStats, RawSample, normalize_sample
from .Manifest import DatasetManifest

logger = logging.getLogger(__name__)


class Dataset(object):
    """

    This class holds the planes of every sample of a manifest in memory. It is read-only once
    loaded, so concurrent training runs may share one instance.

    Attributes:
        manifest (depthcontrast.Datasets.Manifest.DatasetManifest): The inventory (readonly).

    """

    def __init__(self, manifest, samples):
        """Initializes the Dataset class.

        Parameters:
            manifest (DatasetManifest): The inventory.
            samples (dict): A mapping of sample ids to
                :class:`depthcontrast.Augment.RawSample` objects.
        """
        assert isinstance(manifest, DatasetManifest), "`manifest` is required as a DatasetManifest."
        missing = [id for id in manifest.ids() if id not in samples]
        assert not missing, "`samples` lacks ids " + ", ".join(missing[:5])
        self._manifest = manifest
        self._samples = OrderedDict((id, samples[id]) for id in manifest.ids())

    def __len__(self):
        return len(self._samples)

    def __contains__(self, id):
        return id in self._samples

    @property
    def manifest(self):
        return self._manifest

    @classmethod
    def load(cls, manifest, storage, max_workers=4):
        """Reads every plane file of a manifest.

        Parameters:
            manifest (DatasetManifest): The inventory.
            storage (depthcontrast.Storage.Storage): The storage rooted at the dataset directory.
            max_workers (int, optional): The number of reading threads.

        Returns:
            :class:`Dataset`: The loaded dataset.

        Raises:
            :class:`depthcontrast.Exceptions.InvalidPathError`: If a plane file cannot be read.
            :class:`depthcontrast.Exceptions.FormatError`: If a plane file is malformed.
        """
        def read(entry):
            return RawSample(entry.id, storage.read_plane(entry.reflectance_path),
                storage.read_plane(entry.depth_path), entry.label)

        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            samples = list(executor.map(read, manifest.entries))
        logger.info("loaded %d samples", len(samples))
        return cls(manifest, {sample.id: sample for sample in samples})

    def get(self, id):
        return self._samples[id]

    def samples(self, ids):
        return [self._samples[id] for id in ids]

    def labels(self, ids):
        return [self._samples[id].label for id in ids]

    def standardization_stats(self, ids):
        """Computes per-modality scalar statistics over the given (training) ids.

        Parameters:
            ids (list): The sample ids, normally the pretraining pool or the train split.

        Returns:
            :class:`depthcontrast.Augment.NormalizationStats`: The statistics.
        """
        return NormalizationStats.from_samples(self.samples(ids))

    def normalized(self, ids, stats):
        """Returns standardized copies of the given samples."""
        return [normalize_sample(sample, stats) for sample in self.samples(ids)]
