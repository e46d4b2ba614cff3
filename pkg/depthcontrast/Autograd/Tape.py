__all__ = [
    'Record',
    'Tape',
    'backward',
]

import numpy as np

from ..Exceptions import InvalidAttributeError, TapeError
from .Tensor import Tensor
from . import Primitives


class Record(object):
    """

    One entry of a :class:`Tape`: a primitive application.

    Attributes:
        kind (str): The primitive name (readonly).
        inputs (tuple): The ids of the input tensors (readonly).
        output (int): The id of the output tensor (readonly).
        attrs (dict): The attributes the primitive was applied with (readonly).
        context (dict): The forward context saved for the backward pass (readonly).

    """

    def __init__(self, kind, inputs, output, attrs, context):
        self._kind = kind
        self._inputs = tuple(inputs)
        self._output = output
        self._attrs = attrs
        self._context = context

    @property
    def kind(self):
        return self._kind

    @property
    def inputs(self):
        return self._inputs

    @property
    def output(self):
        return self._output

    @property
    def attrs(self):
        return self._attrs

    @property
    def context(self):
        return self._context


class Tape(object):
    """

    This class records primitive applications in execution order so that gradients can be
    propagated in reverse. One tape belongs to one training step; it must never be written from two
    threads.

    Attributes:
        enabled (bool): Whether primitive applications are recorded (readonly).
        dtype (numpy.dtype): The floating point width of the tensors created by the tape
            (readonly).
        records (list): The :class:`Record` objects in execution order (readonly).

    """

    def __init__(self, enabled=True, dtype=np.float64):
        """Initializes the Tape class.

        Parameters:
            enabled (bool, optional): Whether to record primitive applications. A disabled tape
                only hands out tensors, which is what evaluation passes use.
            dtype (numpy.dtype, optional): ``numpy.float64`` (default) or ``numpy.float32``.

        Raises:
            :class:`depthcontrast.Exceptions.InvalidAttributeError`: If the dtype is not supported.
        """
        dtype = np.dtype(dtype)
        if dtype not in (np.dtype(np.float64), np.dtype(np.float32)):
            raise InvalidAttributeError("unsupported tape dtype " + str(dtype))
        self._enabled = bool(enabled)
        self._dtype = dtype
        self._records = []
        self._tensors = {}
        self._producers = {}
        self._params = {}
        self._next_id = 0

    @property
    def enabled(self):
        return self._enabled

    @property
    def dtype(self):
        return self._dtype

    @property
    def records(self):
        return list(self._records)

    def _register(self, tensor):
        if tensor._tape is not None and tensor._tape is not self:
            raise TapeError("tensor is registered with another tape")
        if tensor._id is None:
            tensor._id = self._next_id
            tensor._tape = self
            self._tensors[tensor._id] = tensor
            self._next_id += 1
        return tensor

    def constant(self, values):
        """Creates a tensor that never receives a gradient.

        Parameters:
            values (array_like): The values.

        Returns:
            :class:`depthcontrast.Autograd.Tensor.Tensor`: The registered tensor.
        """
        return self._register(Tensor(values, requires_grad=False, dtype=self._dtype))

    def leaf(self, values, requires_grad=True, name=None):
        """Creates a leaf tensor.

        Parameters:
            values (array_like): The values.
            requires_grad (bool, optional): Whether gradients should reach the leaf.
            name (str, optional): A name used in reports.

        Returns:
            :class:`depthcontrast.Autograd.Tensor.Tensor`: The registered tensor.
        """
        return self._register(Tensor(values, requires_grad=requires_grad and self._enabled,
            name=name, dtype=self._dtype))

    def param(self, name, values, requires_grad=True):
        """Returns the leaf tensor bound to a named parameter, creating it on first use.

        Parameters:
            name (str): The parameter name.
            values (numpy.ndarray): The parameter values, used only on first use.
            requires_grad (bool, optional): Whether gradients should reach the parameter.

        Returns:
            :class:`depthcontrast.Autograd.Tensor.Tensor`: The parameter tensor.
        """
        try:
            return self._params[name]
        except KeyError:
            tensor = self.leaf(values, requires_grad=requires_grad, name=name)
            self._params[name] = tensor
            return tensor

    def apply(self, kind, *inputs, **attrs):
        """Applies a primitive and records it on this tape.

        Parameters:
            kind (str): The primitive name.
            *inputs: The input tensors.
            **attrs: The primitive attributes.

        Returns:
            :class:`depthcontrast.Autograd.Tensor.Tensor`: The output tensor.
        """
        return Primitives.apply_primitive(kind, list(inputs), attrs, tape=self)

    def record(self, kind, inputs, output, attrs, context):
        """Appends a primitive application. Called by
        :func:`depthcontrast.Autograd.Primitives.apply_primitive`.

        Raises:
            :class:`depthcontrast.Exceptions.TapeError`: If a tensor belongs to another tape or the
                output was already produced.
        """
        for tensor in inputs:
            self._register(tensor)
        if output._id is not None:
            raise TapeError("tensor {} is already on the tape".format(output._id))
        self._register(output)
        if self._enabled:
            self._producers[output._id] = len(self._records)
            self._records.append(Record(kind, [tensor._id for tensor in inputs], output._id, attrs, context))

    def relu_masks(self):
        """Returns the activity pattern of every recorded relu, in execution order.

        Returns:
            list: One boolean ``numpy.ndarray`` per relu record.
        """
        return [record.context["mask"] for record in self._records if record.kind == "relu"]

    def zero_grad(self):
        """Resets the gradient accumulators of every tensor on the tape."""
        for tensor in self._tensors.values():
            tensor.grad = None

    def backward(self, loss):
        """Propagates the gradient of a scalar loss to every leaf that requires it.

        Gradients are accumulated into ``Tensor.grad``: calling this twice without
        :meth:`zero_grad` doubles them. Leaves not on any path to the loss receive zeros.

        Parameters:
            loss (depthcontrast.Autograd.Tensor.Tensor): A scalar produced on this tape.

        Returns:
            dict: A dictionary mapping leaf tensor ids to the gradient of this call.

        Raises:
            :class:`depthcontrast.Exceptions.TapeError`: If the loss is not a scalar or was not
                produced on this tape.

        Example:
            This example differentiates the sum of a matrix product::

                import numpy as np
                from depthcontrast.Autograd import Tape

                tape = Tape()
                a = tape.leaf(np.eye(2))
                b = tape.leaf(np.ones((2, 2)))
                loss = tape.apply("reduce_sum", tape.apply("matmul", a, b))
                tape.backward(loss)
                print(a.grad)
        """
        assert isinstance(loss, Tensor), "`loss` is required as a Tensor."
        if loss.size != 1 or loss.ndim > 1:
            raise TapeError("loss must be a scalar, got shape {!r}".format(loss.shape))
        if loss._tape is not self:
            raise TapeError("loss was not produced on this tape")
        if not self._enabled:
            raise TapeError("the tape is not recording")

        grads = {loss._id: np.ones(loss.shape, dtype=self._dtype)}
        for record in reversed(self._records):
            grad = grads.pop(record.output, None)
            if grad is None:
                continue
            inputs = [self._tensors[tensor_id] for tensor_id in record.inputs]
            primitive = Primitives.PRIMITIVES[record.kind]
            input_grads = primitive.backward(grad, record.context, [tensor.values for tensor in inputs],
                record.attrs)
            for tensor, input_grad in zip(inputs, input_grads):
                if input_grad is None or not tensor.requires_grad:
                    continue
                if tensor._id in grads:
                    grads[tensor._id] = grads[tensor._id] + input_grad
                else:
                    grads[tensor._id] = input_grad

        result = {}
        for tensor_id, tensor in self._tensors.items():
            if tensor_id in self._producers or not tensor.requires_grad:
                continue
            grad = grads.get(tensor_id)
            if grad is None:
                grad = np.zeros(tensor.shape, dtype=self._dtype)
            grad = np.asarray(grad, dtype=self._dtype).reshape(tensor.shape)
            result[tensor_id] = grad
            tensor.grad = grad.copy() if tensor.grad is None else tensor.grad + grad
        return result

    def param_grads(self):
        """Returns the accumulated gradients of the named parameters.

        Returns:
            dict: A dictionary mapping parameter names to gradients; parameters that did not
            require a gradient are omitted.
        """
        return {name: (tensor.grad if tensor.grad is not None else np.zeros(tensor.shape, dtype=self._dtype))
            for name, tensor in self._params.items() if tensor.requires_grad}


def backward(tape, loss):
    """Propagates the gradient of ``loss`` through ``tape``; see :meth:`Tape.backward`."""
    assert isinstance(tape, Tape), "`tape` is required as a Tape."
    return tape.backward(loss)
