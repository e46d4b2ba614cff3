__all__ = [
    'ModelParams',
    'init_params',
]

import logging
from collections import OrderedDict

import numpy as np

from ..Exceptions import CheckpointMismatchError
from .Configs import EncoderConfig, ProjectionHeadConfig, ClassifierHeadConfig

logger = logging.getLogger(__name__)

GROUPS = ("encoder", "projector", "classifier")


class ModelParams(object):
    """

    This class holds the named parameter tensors of the encoder, the projection head and the
    classification head, the batch normalization running statistics, the seed that produced them
    and a snapshot of the configuration they were built for.

    Parameter values are never modified in place: an optimizer step replaces the array stored under
    a name. Only one trainer may write to a ModelParams object at a time.

    Attributes:
        tensors (collections.OrderedDict): A mapping of parameter names to ``numpy.ndarray`` values,
            in initialization order.
        buffers (collections.OrderedDict): A mapping of running statistic names
            (``<layer>.running_mean`` and ``<layer>.running_var``) to ``numpy.ndarray`` values.
        seed (int): The seed the parameters were initialized from (readonly).
        encoder_config (EncoderConfig): The encoder layout (readonly).
        projector_config (ProjectionHeadConfig): The projection head layout (readonly).
        classifier_config (ClassifierHeadConfig): The classification head layout (readonly).

    """

    def __init__(self, tensors, buffers, seed, encoder_config, projector_config, classifier_config):
        self.tensors = OrderedDict(tensors)
        self.buffers = OrderedDict(buffers)
        self._seed = seed
        self._encoder_config = encoder_config
        self._projector_config = projector_config
        self._classifier_config = classifier_config

    def __repr__(self):
        return 'ModelParams(seed={!r}, tensors={}, parameters={})'.format(
            self._seed, len(self.tensors), self.parameter_count())

    @property
    def seed(self):
        return self._seed

    @property
    def encoder_config(self):
        return self._encoder_config

    @property
    def projector_config(self):
        return self._projector_config

    @property
    def classifier_config(self):
        return self._classifier_config

    def snapshot(self):
        """Returns the configuration snapshot stored in checkpoints.

        Returns:
            dict: The seed and the three layouts.
        """
        return {
            "seed": self._seed,
            "encoder": self._encoder_config.to_dict(),
            "projector": self._projector_config.to_dict(),
            "classifier": self._classifier_config.to_dict(),
        }

    def names(self, group=None):
        """Lists the parameter names, optionally restricted to one of ``encoder``, ``projector`` or
        ``classifier``.
        """
        if group is None:
            return list(self.tensors)
        assert group in GROUPS, "`group` must be one of " + ", ".join(GROUPS)
        prefix = group + "."
        return [name for name in self.tensors if name.startswith(prefix)]

    def group(self, group):
        """Returns the parameters of one group.

        Parameters:
            group (str): ``encoder``, ``projector`` or ``classifier``.

        Returns:
            dict: A mapping of names to arrays.
        """
        return OrderedDict((name, self.tensors[name]) for name in self.names(group))

    def parameter_count(self, group=None):
        return int(sum(self.tensors[name].size for name in self.names(group)))

    def copy(self):
        """Returns a deep copy.

        Returns:
            :class:`ModelParams`: The copy.
        """
        return ModelParams(
            ((name, np.array(value)) for name, value in self.tensors.items()),
            ((name, np.array(value)) for name, value in self.buffers.items()),
            self._seed, self._encoder_config, self._projector_config, self._classifier_config)

    def equals(self, other, group=None):
        """Compares the parameters of two objects bit for bit.

        Parameters:
            other (ModelParams): The parameters to compare with.
            group (str, optional): Restricts the comparison to one group.

        Returns:
            bool: Whether the names, shapes and values all agree.
        """
        names = self.names(group)
        if names != other.names(group):
            return False
        return all(self.tensors[name].shape == other.tensors[name].shape
            and self.tensors[name].tobytes() == other.tensors[name].tobytes() for name in names)

    def load(self, tensors, groups=GROUPS):
        """Replaces parameters with values read from a checkpoint.

        Parameters:
            tensors (dict): A mapping of names to arrays; buffers may be included.
            groups (tuple, optional): The groups to load; other groups keep their values.

        Raises:
            :class:`depthcontrast.Exceptions.CheckpointMismatchError`: If a name is missing or a
                shape differs.
        """
        for group in groups:
            prefix = group + "."
            for name in list(self.tensors) + list(self.buffers):
                if not name.startswith(prefix):
                    continue
                target = self.tensors if name in self.tensors else self.buffers
                if name not in tensors:
                    raise CheckpointMismatchError("checkpoint lacks tensor", name)
                value = np.asarray(tensors[name], dtype=np.float64)
                if value.shape != target[name].shape:
                    raise CheckpointMismatchError("shape {} differs from expected {}".format(
                        value.shape, target[name].shape), name)
                target[name] = np.array(value)

    def state(self):
        """Returns parameters and buffers as one mapping, in checkpoint order."""
        state = OrderedDict(self.tensors)
        state.update(self.buffers)
        return state

    @classmethod
    def from_snapshot(cls, snapshot, tensors):
        """Rebuilds parameters from a configuration snapshot and checkpoint tensors.

        Raises:
            :class:`depthcontrast.Exceptions.CheckpointMismatchError`: If the tensors do not fit
                the layouts.
        """
        params = init_params(EncoderConfig.from_dict(snapshot["encoder"]),
            ProjectionHeadConfig.from_dict(snapshot["projector"]),
            ClassifierHeadConfig.from_dict(snapshot["classifier"]), snapshot.get("seed", 0))
        params.load(tensors)
        return params


def _normal(rng, shape, fan_in, gain):
    return rng.standard_normal(shape) * np.sqrt(gain / fan_in)


def _add_norm(tensors, buffers, prefix, features):
    tensors[prefix + ".gamma"] = np.ones(features)
    tensors[prefix + ".beta"] = np.zeros(features)
    buffers[prefix + ".running_mean"] = np.zeros(features)
    buffers[prefix + ".running_var"] = np.ones(features)


def _add_linear(tensors, rng, prefix, fan_in, fan_out, gain):
    tensors[prefix + ".weight"] = _normal(rng, (fan_in, fan_out), fan_in, gain)
    tensors[prefix + ".bias"] = np.zeros(fan_out)


def init_params(encoder_config, projector_config, classifier_config, seed):
    """Creates deterministic initial parameters.

    Weights are drawn from one ``numpy.random.Generator`` seeded with ``seed``, always in the same
    order: encoder stages, projection head layers, classification head layers. Layers followed by a
    relu draw from a normal distribution with variance ``2 / fan_in``, the final linear layers from
    one with variance ``1 / fan_in``. Biases and normalization shifts start at zero, normalization
    scales at one.

    Parameters:
        encoder_config (EncoderConfig): The encoder layout.
        projector_config (ProjectionHeadConfig): The projection head layout.
        classifier_config (ClassifierHeadConfig): The classification head layout.
        seed (int): The seed.

    Returns:
        :class:`ModelParams`: The parameters.

    Raises:
        AssertionError: If the input parameters are invalid.

    Example:
        This example initializes the default desk-sized model twice and compares the results::

            from depthcontrast.Models import (EncoderConfig, ProjectionHeadConfig,
                ClassifierHeadConfig, init_params)

            configs = (EncoderConfig(), ProjectionHeadConfig(), ClassifierHeadConfig())
            assert init_params(*configs, seed=7).equals(init_params(*configs, seed=7))
    """
    assert isinstance(encoder_config, EncoderConfig), "`encoder_config` is required as an EncoderConfig."
    assert isinstance(projector_config, ProjectionHeadConfig), "`projector_config` is required as a ProjectionHeadConfig."
    assert isinstance(classifier_config, ClassifierHeadConfig), "`classifier_config` is required as a ClassifierHeadConfig."
    assert isinstance(seed, (int, np.integer)), "`seed` is required as an int."

    rng = np.random.default_rng(seed)
    tensors = OrderedDict()
    buffers = OrderedDict()

    channels = encoder_config.input_channels
    for index, (out_channels, kernel, _) in enumerate(encoder_config.stages):
        prefix = "encoder.stage{}".format(index)
        fan_in = channels * kernel * kernel
        tensors[prefix + ".weight"] = _normal(rng, (out_channels, channels, kernel, kernel), fan_in, 2.0)
        tensors[prefix + ".bias"] = np.zeros(out_channels)
        if encoder_config.batch_norm:
            _add_norm(tensors, buffers, prefix + ".bn", out_channels)
        channels = out_channels

    width = encoder_config.embedding_dim
    for index, hidden in enumerate(projector_config.hidden_sizes):
        prefix = "projector.layer{}".format(index)
        gain = 2.0 if projector_config.relu[index] else 1.0
        _add_linear(tensors, rng, prefix, width, hidden, gain)
        if projector_config.batch_norm[index]:
            _add_norm(tensors, buffers, prefix + ".bn", hidden)
        width = hidden
    _add_linear(tensors, rng, "projector.output", width, projector_config.output_dim, 1.0)

    _add_linear(tensors, rng, "classifier.hidden", encoder_config.embedding_dim, classifier_config.hidden, 2.0)
    _add_linear(tensors, rng, "classifier.output", classifier_config.hidden, classifier_config.num_classes, 1.0)

    params = ModelParams(tensors, buffers, int(seed), encoder_config, projector_config, classifier_config)
    logger.debug("initialized %d tensors (%d parameters) from seed %d", len(tensors),
        params.parameter_count(), seed)
    return params
