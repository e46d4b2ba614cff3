__all__ = [
    'Datasets',
]

from .Dataset import Dataset
from .Folds import SplitSpec, make_splits, stratified_folds
from .Synthetic import GeneratorConfig, generate_synthetic_dataset


class Datasets(object):
    """

    This class should be used to create, read and split datasets. It's instantiated for you as an
    attribute of the :class:`depthcontrast.DepthContrast.DepthContrast` class.

    """

    def __init__(self, dc, storage):
        """Initializes the Datasets class.

        Parameters:
            dc (depthcontrast.DepthContrast.DepthContrast): The DepthContrast instance that is
                instantiating the object.
            storage (depthcontrast.Storage.Storage): The storage rooted at the data directory.
        """
        self._dc = dc
        self._storage = storage

    def generate(self, config=None, seed=0):
        """Renders a synthetic dataset into the data directory.

        Parameters:
            config (depthcontrast.Datasets.Synthetic.GeneratorConfig, optional): The generator
                settings; the default scale yields about 700 samples.
            seed (int, optional): The dataset seed.

        Returns:
            :class:`depthcontrast.Datasets.Manifest.DatasetManifest`: The manifest.

        Example:
            This example writes a small dataset and prints its class counts::

                from depthcontrast import DepthContrast
                from depthcontrast.Datasets import GeneratorConfig

                dc = DepthContrast("./data")
                manifest = dc.datasets.generate(GeneratorConfig(scale=0.1), seed=7)
                print(manifest.class_counts())
        """
        config = config if config is not None else GeneratorConfig()
        return generate_synthetic_dataset(config, seed, self._storage, max_workers=self._dc.MAX_WORKERS)

    def read_manifest(self):
        """Reads the manifest of the data directory.

        Returns:
            :class:`depthcontrast.Datasets.Manifest.DatasetManifest`: The manifest.
        """
        return self._storage.read_manifest()

    def load(self):
        """Reads the manifest and every plane of the data directory.

        Returns:
            :class:`depthcontrast.Datasets.Dataset.Dataset`: The loaded dataset.
        """
        return Dataset.load(self.read_manifest(), self._storage, max_workers=self._dc.MAX_WORKERS)

    def folds(self, dataset, k=5, seed=0):
        """Assigns the samples of a dataset to stratified folds; see
        :func:`depthcontrast.Datasets.Folds.stratified_folds`.
        """
        return stratified_folds(dataset.manifest, k=k, seed=seed)

    def splits(self, plan, protocol="fully_supervised", test_fold=0, seed=0):
        """Derives the sample ids of one rotation; see
        :func:`depthcontrast.Datasets.Folds.make_splits`.
        """
        return make_splits(plan, SplitSpec(protocol, seed=seed), test_fold)
