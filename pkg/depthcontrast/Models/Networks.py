__all__ = [
    'encoder_forward',
    'projector_forward',
    'classifier_forward',
]

import numpy as np

from ..Autograd import Tape, Tensor
from ..Exceptions import ShapeError
from .Params import ModelParams

BN_MOMENTUM = 0.1
BN_EPSILON = 1e-5


def _input(tape, values):
    if isinstance(values, Tensor):
        return values
    return tape.constant(values)


def _param(tape, params, name, trainable):
    return tape.param(name, params.tensors[name], requires_grad=trainable)


def _batch_norm(tape, params, prefix, x, training, trainable):
    running = {
        "mean": params.buffers[prefix + ".running_mean"],
        "var": params.buffers[prefix + ".running_var"],
    }
    out = tape.apply("batch_norm", x, _param(tape, params, prefix + ".gamma", trainable),
        _param(tape, params, prefix + ".beta", trainable), training=training, momentum=BN_MOMENTUM,
        epsilon=BN_EPSILON, running=running)
    if training:
        params.buffers[prefix + ".running_mean"] = running["mean"]
        params.buffers[prefix + ".running_var"] = running["var"]
    return out


def _linear(tape, params, prefix, x, trainable):
    out = tape.apply("matmul", x, _param(tape, params, prefix + ".weight", trainable))
    return tape.apply("add", out, _param(tape, params, prefix + ".bias", trainable))


def encoder_forward(params, images, tape=None, training=False, trainable=True):
    """Maps a batch of images to their pooled representations ``h``.

    Parameters:
        params (depthcontrast.Models.Params.ModelParams): The model parameters.
        images (numpy.ndarray or depthcontrast.Autograd.Tensor.Tensor): An ``N x C x H x W``
            batch.
        tape (depthcontrast.Autograd.Tape.Tape, optional): The tape to record on; a disabled tape
            is used when omitted.
        training (bool, optional): Whether normalization layers use batch statistics.
        trainable (bool, optional): Whether the encoder parameters receive gradients.

    Returns:
        :class:`depthcontrast.Autograd.Tensor.Tensor`: The ``N x d`` representations.

    Raises:
        AssertionError: If the input parameters are invalid.
        :class:`depthcontrast.Exceptions.ShapeError`: If the channel count differs from the
            configuration or the image is too small for the stages.
    """
    assert isinstance(params, ModelParams), "`params` is required as a ModelParams."
    tape = tape if tape is not None else Tape(enabled=False)
    config = params.encoder_config
    x = _input(tape, images)
    if x.ndim != 4 or x.shape[1] != config.input_channels:
        raise ShapeError("encoder expects N x {} x H x W images".format(config.input_channels), [x.shape])
    if min(config.output_size(x.shape[2]), config.output_size(x.shape[3])) < 1:
        raise ShapeError("images are too small for the encoder stages", [x.shape])

    for index, (_, kernel, stride) in enumerate(config.stages):
        prefix = "encoder.stage{}".format(index)
        x = tape.apply("conv2d", x, _param(tape, params, prefix + ".weight", trainable),
            _param(tape, params, prefix + ".bias", trainable), stride=stride, padding=kernel // 2)
        if config.batch_norm:
            x = _batch_norm(tape, params, prefix + ".bn", x, training, trainable)
        x = tape.apply("relu", x)
    return tape.apply("global_avg_pool", x)


def projector_forward(params, h, tape=None, training=False):
    """Maps representations ``h`` to projections ``z``.

    Parameters:
        params (depthcontrast.Models.Params.ModelParams): The model parameters.
        h (numpy.ndarray or depthcontrast.Autograd.Tensor.Tensor): The ``N x d``
            representations.
        tape (depthcontrast.Autograd.Tape.Tape, optional): The tape to record on.
        training (bool, optional): Whether normalization layers use batch statistics and update
            the running statistics.

    Returns:
        :class:`depthcontrast.Autograd.Tensor.Tensor`: The ``N x p`` projections.

    Raises:
        :class:`depthcontrast.Exceptions.ShapeError`: If the width of ``h`` is not ``d``.
    """
    assert isinstance(params, ModelParams), "`params` is required as a ModelParams."
    tape = tape if tape is not None else Tape(enabled=False)
    config = params.projector_config
    x = _input(tape, h)
    if x.ndim != 2 or x.shape[1] != params.encoder_config.embedding_dim:
        raise ShapeError("projector expects N x {} inputs".format(params.encoder_config.embedding_dim), [x.shape])

    for index in range(len(config.hidden_sizes)):
        prefix = "projector.layer{}".format(index)
        x = _linear(tape, params, prefix, x, True)
        if config.relu[index]:
            x = tape.apply("relu", x)
        if config.batch_norm[index]:
            x = _batch_norm(tape, params, prefix + ".bn", x, training, True)
    return _linear(tape, params, "projector.output", x, True)


def classifier_forward(params, h, tape=None, training=False, stream=None):
    """Maps representations ``h`` to class logits.

    Parameters:
        params (depthcontrast.Models.Params.ModelParams): The model parameters.
        h (numpy.ndarray or depthcontrast.Autograd.Tensor.Tensor): The ``N x d``
            representations.
        tape (depthcontrast.Autograd.Tape.Tape, optional): The tape to record on.
        training (bool, optional): Whether dropout is active.
        stream (numpy.random.Generator, optional): The dropout stream; required when training
            with a positive dropout rate.

    Returns:
        :class:`depthcontrast.Autograd.Tensor.Tensor`: The ``N x num_classes`` logits.

    Raises:
        :class:`depthcontrast.Exceptions.ShapeError`: If the width of ``h`` is not ``d``.
    """
    assert isinstance(params, ModelParams), "`params` is required as a ModelParams."
    assert stream is None or isinstance(stream, np.random.Generator), "`stream` is required as a Generator."
    tape = tape if tape is not None else Tape(enabled=False)
    x = _input(tape, h)
    if x.ndim != 2 or x.shape[1] != params.encoder_config.embedding_dim:
        raise ShapeError("classifier expects N x {} inputs".format(params.encoder_config.embedding_dim), [x.shape])

    x = tape.apply("relu", _linear(tape, params, "classifier.hidden", x, True))
    x = tape.apply("dropout", x, rate=params.classifier_config.dropout_rate, training=training, stream=stream)
    return _linear(tape, params, "classifier.output", x, True)
