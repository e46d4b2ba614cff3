__all__ = [
    'Tensor',
]

import numpy as np

from ..Exceptions import NumericalError, ShapeError


class Tensor(object):
    """

    This class represents an immutable dense array of floating point values that may take part in
    a recorded computation. Tensors are normally created for you by a
    :class:`depthcontrast.Autograd.Tape.Tape` (see :meth:`~depthcontrast.Autograd.Tape.Tape.param`
    and :meth:`~depthcontrast.Autograd.Tape.Tape.constant`) or returned by
    :func:`depthcontrast.Autograd.Primitives.apply_primitive`.

    Attributes:
        id (int): The id assigned by the tape the tensor is registered with, or ``None`` (readonly).
        values (numpy.ndarray): The read-only row-major values (readonly).
        shape (tuple): The dimensions of the tensor (readonly).
        requires_grad (bool): Whether gradients should be propagated to this tensor (readonly).
        grad (numpy.ndarray): The gradient accumulator; ``None`` until a backward pass reaches the
            tensor.
        name (str): An optional name used when reporting gradients.

    """

    def __init__(self, values, requires_grad=False, name=None, dtype=np.float64):
        """Initializes the Tensor class.

        Parameters:
            values (array_like): The values of the tensor; they are copied.
            requires_grad (bool, optional): Whether gradients should be propagated to the tensor.
            name (str, optional): A name for the tensor.
            dtype (numpy.dtype, optional): Either ``numpy.float64`` (default) or
                ``numpy.float32``.

        Raises:
            :class:`depthcontrast.Exceptions.ShapeError`: If a dimension is not positive.
            :class:`depthcontrast.Exceptions.NumericalError`: If the values are not finite.
        """
        array = np.array(values, dtype=dtype)
        if any(size < 1 for size in array.shape):
            raise ShapeError("tensor dimensions must be positive", [array.shape])
        if not np.all(np.isfinite(array)):
            raise NumericalError("tensor values must be finite")
        array.setflags(write=False)
        self._values = array
        self._requires_grad = bool(requires_grad)
        self._id = None
        self._tape = None
        self.grad = None
        self.name = name

    @classmethod
    def _wrap(cls, array, requires_grad):
        # Primitive outputs are validated and owned by the caller.
        tensor = cls.__new__(cls)
        array.setflags(write=False)
        tensor._values = array
        tensor._requires_grad = requires_grad
        tensor._id = None
        tensor._tape = None
        tensor.grad = None
        tensor.name = None
        return tensor

    def __repr__(self):
        return 'Tensor(shape={!r}, dtype={}, requires_grad={!r})'.format(
            self.shape, self._values.dtype, self._requires_grad)

    @property
    def id(self):
        return self._id

    @property
    def values(self):
        return self._values

    @property
    def shape(self):
        return self._values.shape

    @property
    def ndim(self):
        return self._values.ndim

    @property
    def size(self):
        return self._values.size

    @property
    def dtype(self):
        return self._values.dtype

    @property
    def requires_grad(self):
        return self._requires_grad

    def item(self):
        """Returns the value of a single-element tensor as a Python float.

        Returns:
            float: The value.

        Raises:
            :class:`depthcontrast.Exceptions.ShapeError`: If the tensor holds more than one value.
        """
        if self._values.size != 1:
            raise ShapeError("item() requires a single-element tensor", [self.shape])
        return float(self._values.reshape(-1)[0])

    def numpy(self):
        """Returns a writable copy of the values.

        Returns:
            numpy.ndarray: The copied values.
        """
        return np.array(self._values)

    def zero_grad(self):
        """Resets the gradient accumulator."""
        self.grad = None
