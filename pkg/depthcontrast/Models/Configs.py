__all__ = [
    'EncoderConfig',
    'ProjectionHeadConfig',
    'ClassifierHeadConfig',
]

from ..Exceptions import InvalidConfigError

FULL_PROJECTOR_HIDDEN = (2048, 2048, 512)
FULL_PROJECTOR_OUTPUT = 128
DESK_PROJECTOR_SCALE = 1.0 / 16


def _positive_int(name, value):
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise InvalidConfigError("`{}` must be a positive integer, got {!r}".format(name, value))
    return value


class EncoderConfig(object):
    """

    The layout of the convolutional base encoder: a stack of ``conv2d`` + ``relu`` stages (with an
    optional ``batch_norm`` between them) followed by global average pooling.

    Attributes:
        input_channels (int): 1 or 3 (readonly).
        stages (tuple): ``(out_channels, kernel_size, stride)`` per stage (readonly).
        embedding_dim (int): The width ``d`` of the pooled representation; equals the channels of
            the last stage (readonly).
        batch_norm (bool): Whether each stage normalizes before its relu (readonly).

    """

    DEFAULT_STAGES = ((16, 3, 2), (32, 3, 2), (64, 3, 2), (128, 3, 2))

    def __init__(self, input_channels=3, stages=DEFAULT_STAGES, embedding_dim=None, batch_norm=False):
        """Initializes the EncoderConfig class.

        Parameters:
            input_channels (int, optional): 1 or 3.
            stages (list, optional): ``(out_channels, kernel_size, stride)`` per stage.
            embedding_dim (int, optional): The pooled width; defaults to the channels of the last
                stage and must agree with them when given.
            batch_norm (bool, optional): Whether to normalize after each convolution.

        Raises:
            :class:`depthcontrast.Exceptions.InvalidConfigError`: If an invariant is violated.
        """
        if input_channels not in (1, 3):
            raise InvalidConfigError("`input_channels` must be 1 or 3, got {!r}".format(input_channels))
        stages = tuple(tuple(stage) for stage in stages)
        if len(stages) == 0:
            raise InvalidConfigError("the encoder needs at least one stage")
        for index, stage in enumerate(stages):
            if len(stage) != 3:
                raise InvalidConfigError("stage {} must be (out_channels, kernel_size, stride)".format(index))
            for field, value in zip(("out_channels", "kernel_size", "stride"), stage):
                _positive_int("stages[{}].{}".format(index, field), value)
        last = stages[-1][0]
        if embedding_dim is None:
            embedding_dim = last
        if _positive_int("embedding_dim", embedding_dim) != last:
            raise InvalidConfigError("`embedding_dim` {} differs from the last stage width {}".format(
                embedding_dim, last))
        self._input_channels = input_channels
        self._stages = stages
        self._embedding_dim = embedding_dim
        self._batch_norm = bool(batch_norm)

    def __repr__(self):
        return 'EncoderConfig({!r})'.format(self.to_dict())

    def __eq__(self, other):
        return isinstance(other, EncoderConfig) and self.to_dict() == other.to_dict()

    @property
    def input_channels(self):
        return self._input_channels

    @property
    def stages(self):
        return self._stages

    @property
    def embedding_dim(self):
        return self._embedding_dim

    @property
    def batch_norm(self):
        return self._batch_norm

    def output_size(self, size):
        """Returns the spatial size after every stage for a square input.

        Stages pad by ``kernel_size // 2``.

        Parameters:
            size (int): The input height (or width).

        Returns:
            int: The output size; smaller than 1 when the input is too small.
        """
        for _, kernel, stride in self._stages:
            padding = kernel // 2
            if size + 2 * padding < kernel:
                return 0
            size = (size + 2 * padding - kernel) // stride + 1
        return size

    def check_input_size(self, size):
        """Raises unless an input of the given size survives every stage.

        Raises:
            :class:`depthcontrast.Exceptions.InvalidConfigError`: If the input is too small.
        """
        if self.output_size(size) < 1:
            raise InvalidConfigError("input size {} vanishes after the encoder stages".format(size))

    def to_dict(self):
        return {
            "input_channels": self._input_channels,
            "stages": [list(stage) for stage in self._stages],
            "embedding_dim": self._embedding_dim,
            "batch_norm": self._batch_norm,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


class ProjectionHeadConfig(object):
    """

    The layout of the projection head ``g``: hidden ``matmul`` layers, each followed by a relu and
    a batch normalization when enabled, then a linear output layer.

    Attributes:
        hidden_sizes (tuple): The hidden widths (readonly).
        output_dim (int): The width of ``z`` (readonly).
        relu (tuple): A relu flag per hidden layer (readonly).
        batch_norm (tuple): A batch normalization flag per hidden layer (readonly).

    """

    def __init__(self, hidden_sizes=None, output_dim=None, scale=DESK_PROJECTOR_SCALE, relu=True, batch_norm=True):
        """Initializes the ProjectionHeadConfig class.

        Parameters:
            hidden_sizes (list, optional): The hidden widths. Defaults to 2048-2048-512 multiplied
                by ``scale``.
            output_dim (int, optional): The output width. Defaults to 128 multiplied by ``scale``.
            scale (float, optional): The factor applied to the default sizes; 1/16 by default, 1
                for the full-size head.
            relu (bool or list, optional): One flag for every hidden layer, or a list of flags.
            batch_norm (bool or list, optional): One flag for every hidden layer, or a list.

        Raises:
            :class:`depthcontrast.Exceptions.InvalidConfigError`: If an invariant is violated.
        """
        if not scale > 0:
            raise InvalidConfigError("`scale` must be positive, got {!r}".format(scale))
        if hidden_sizes is None:
            hidden_sizes = [max(1, int(round(size * scale))) for size in FULL_PROJECTOR_HIDDEN]
        if output_dim is None:
            output_dim = max(1, int(round(FULL_PROJECTOR_OUTPUT * scale)))
        hidden_sizes = tuple(_positive_int("hidden_sizes", size) for size in hidden_sizes)
        if len(hidden_sizes) == 0:
            raise InvalidConfigError("the projection head needs at least one hidden layer")
        _positive_int("output_dim", output_dim)
        if output_dim > hidden_sizes[0]:
            raise InvalidConfigError("`output_dim` {} exceeds the first hidden size {}".format(
                output_dim, hidden_sizes[0]))
        self._hidden_sizes = hidden_sizes
        self._output_dim = output_dim
        self._relu = self._flags("relu", relu)
        self._batch_norm = self._flags("batch_norm", batch_norm)

    def _flags(self, name, value):
        if isinstance(value, bool):
            return (value,) * len(self._hidden_sizes)
        flags = tuple(bool(flag) for flag in value)
        if len(flags) != len(self._hidden_sizes):
            raise InvalidConfigError("`{}` needs one flag per hidden layer".format(name))
        return flags

    def __repr__(self):
        return 'ProjectionHeadConfig({!r})'.format(self.to_dict())

    def __eq__(self, other):
        return isinstance(other, ProjectionHeadConfig) and self.to_dict() == other.to_dict()

    @property
    def hidden_sizes(self):
        return self._hidden_sizes

    @property
    def output_dim(self):
        return self._output_dim

    @property
    def relu(self):
        return self._relu

    @property
    def batch_norm(self):
        return self._batch_norm

    def to_dict(self):
        return {
            "hidden_sizes": list(self._hidden_sizes),
            "output_dim": self._output_dim,
            "relu": list(self._relu),
            "batch_norm": list(self._batch_norm),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


class ClassifierHeadConfig(object):
    """

    The layout of the classification head: one hidden layer with relu and dropout, and an output
    layer with one unit per class.

    Attributes:
        hidden (int): The hidden width (readonly).
        dropout_rate (float): The dropout rate of the hidden layer (readonly).
        num_classes (int): The number of output units (readonly).

    """

    def __init__(self, hidden=512, dropout_rate=0.3, num_classes=7):
        """Initializes the ClassifierHeadConfig class.

        Parameters:
            hidden (int, optional): The hidden width.
            dropout_rate (float, optional): The dropout rate, in ``[0, 1)``.
            num_classes (int, optional): The number of classes, at least 2.

        Raises:
            :class:`depthcontrast.Exceptions.InvalidConfigError`: If an invariant is violated.
        """
        _positive_int("hidden", hidden)
        if not 0.0 <= dropout_rate < 1.0:
            raise InvalidConfigError("`dropout_rate` must lie in [0, 1), got {!r}".format(dropout_rate))
        if _positive_int("num_classes", num_classes) < 2:
            raise InvalidConfigError("`num_classes` must be at least 2")
        self._hidden = hidden
        self._dropout_rate = float(dropout_rate)
        self._num_classes = num_classes

    def __repr__(self):
        return 'ClassifierHeadConfig({!r})'.format(self.to_dict())

    def __eq__(self, other):
        return isinstance(other, ClassifierHeadConfig) and self.to_dict() == other.to_dict()

    @property
    def hidden(self):
        return self._hidden

    @property
    def dropout_rate(self):
        return self._dropout_rate

    @property
    def num_classes(self):
        return self._num_classes

    def to_dict(self):
        return {
            "hidden": self._hidden,
            "dropout_rate": self._dropout_rate,
            "num_classes": self._num_classes,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(**data)
