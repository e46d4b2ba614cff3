__all__ = [
    'Models',
]

from .Params import init_params


class Models(object):
    """

    This class should be used to create, save and load model parameters. It's instantiated for you
    as an attribute of the :class:`depthcontrast.DepthContrast.DepthContrast` class.

    """

    def __init__(self, dc, storage):
        """Initializes the Models class.

        Parameters:
            dc (depthcontrast.DepthContrast.DepthContrast): The DepthContrast instance that is
                instantiating the object.
            storage (depthcontrast.Storage.Storage): The storage used for checkpoints.
        """
        self._dc = dc
        self._storage = storage

    def create(self, config, seed=None):
        """Initializes parameters for the layouts of a run configuration.

        Parameters:
            config (depthcontrast.Config.RunConfig): The configuration.
            seed (int, optional): The initialization seed; defaults to the configured seed.

        Returns:
            :class:`depthcontrast.Models.Params.ModelParams`: The parameters.
        """
        return init_params(config.encoder_config(), config.projector_config(), config.classifier_config(),
            config.seed if seed is None else seed)

    def save(self, path, params, config=None):
        """Writes a checkpoint in the instance width (``DTYPE``).

        Parameters:
            path (str): The checkpoint path.
            params (depthcontrast.Models.Params.ModelParams): The parameters.
            config (depthcontrast.Config.RunConfig, optional): The run configuration to embed.
        """
        self._storage.write_checkpoint(path, params, width=self._dc.DTYPE.itemsize, config=config)

    def load(self, path, config=None):
        """Reads a checkpoint, optionally checking it against the layouts of a configuration.

        Parameters:
            path (str): The checkpoint path.
            config (depthcontrast.Config.RunConfig, optional): The configuration the checkpoint
                must fit.

        Returns:
            :class:`depthcontrast.Models.Params.ModelParams`: The parameters.

        Raises:
            :class:`depthcontrast.Exceptions.CheckpointMismatchError`: If the checkpoint does not
                fit the configuration; the error names the tensor.

        Example:
            This example continues from a pretrained checkpoint::

                from depthcontrast import DepthContrast
                from depthcontrast.Config import load_config

                dc = DepthContrast("./data")
                params = dc.models.load("./out/pretrained.dckp", load_config())
        """
        template = self.create(config) if config is not None else None
        return self._storage.read_checkpoint(path, template)
