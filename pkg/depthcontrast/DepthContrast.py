import numpy as np

from .Config import default_data_directory
from .Storage import Storage
from .Datasets import Datasets
from .Models import Models
from .Training import Trainer, Protocols


class DepthContrast(object):
    """

    This is the main class that should be instantiated at the beginning of your Python program
    with the directory holding (or receiving) your dataset.

    Attributes:
        storage (:class:`depthcontrast.Storage.Storage`): An instance of the Storage class rooted at
            the data directory.
        datasets (:class:`depthcontrast.Datasets.Datasets.Datasets`): An instance of the Datasets
            class.
        models (:class:`depthcontrast.Models.Models.Models`): An instance of the Models class.
        trainer (:class:`depthcontrast.Training.Trainer.Trainer`): An instance of the Trainer class.
        protocols (:class:`depthcontrast.Training.Protocols.Protocols`): An instance of the
            Protocols class.
        DTYPE (numpy.dtype): The width of checkpoint payloads.
        MAX_WORKERS (int): The number of threads used to render and read plane files.

    Example:
        This example generates a dataset, pretrains on the training folds of the first rotation
        and saves the checkpoint::

            from depthcontrast import DepthContrast
            from depthcontrast.Config import load_config

            dc = DepthContrast("./data")
            config = load_config("desk", {"pretrain.epochs": 20})
            dc.datasets.generate(config.generator_config(), seed=7)
            dataset = dc.datasets.load()
            splits = dc.datasets.splits(dc.datasets.folds(dataset), test_fold=0)
            params, record = dc.trainer.pretrain(dataset, splits, dc.models.create(config), config)
            dc.models.save("pretrained.dckp", params, config)
    """

    def __init__(self, data_dir=None, DTYPE=np.float64, MAX_WORKERS=4):
        """Initializes the DepthContrast class.

        Parameters:
            data_dir (str, optional): The data directory. Defaults to the ``DEPTHCONTRAST_DATA``
                environment variable, then ``./data``.
            DTYPE (numpy.dtype, optional): ``numpy.float64`` (default) or ``numpy.float32``.
            MAX_WORKERS (int, optional): The number of file worker threads.

        Raises:
            AssertionError: If the input parameters are invalid.
        """
        data_dir = data_dir if data_dir is not None else default_data_directory()
        assert isinstance(data_dir, str), "`data_dir` must be a string."
        assert np.dtype(DTYPE) in (np.dtype(np.float64), np.dtype(np.float32)), "`DTYPE` must be float64 or float32."
        assert isinstance(MAX_WORKERS, int) and MAX_WORKERS >= 1, "`MAX_WORKERS` must be a positive integer."

        self.DTYPE = np.dtype(DTYPE)
        self.MAX_WORKERS = MAX_WORKERS

        self.storage = Storage(data_dir)

        self.datasets = Datasets(self, self.storage)
        self.models = Models(self, self.storage)
        self.trainer = Trainer(self, self.storage)
        self.protocols = Protocols(self, self.storage)
