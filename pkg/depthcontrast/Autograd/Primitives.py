__all__ = [
    'PRIMITIVES',
    'apply_primitive',
]

import logging
import numbers

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..Exceptions import InvalidAttributeError, NumericalError, ShapeError
from .Tensor import Tensor

logger = logging.getLogger(__name__)


def _unbroadcast(grad, shape):
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad

def _broadcast_shape(kind, a, b):
    try:
        shape = np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError("`" + kind + "` operands cannot be broadcast", [a.shape, b.shape])
    if shape != a.shape:
        raise ShapeError("`" + kind + "` result must keep the shape of the first operand",
            [a.shape, b.shape])
    return shape

def _require_ndim(kind, value, ndim):
    if value.ndim != ndim:
        raise ShapeError("`{}` expects a {}-d input".format(kind, ndim), [value.shape])


class Primitive(object):
    """

    Base class of the differentiable primitives. Subclasses implement ``forward``, which returns
    the output array and the context saved for the backward pass, and ``backward``, which maps the
    output gradient to one gradient (or ``None``) per input.

    """

    arity = (1, 1)

    @classmethod
    def validate(cls, kind, values, attrs):
        pass

    @staticmethod
    def forward(values, attrs):
        raise NotImplementedError

    @staticmethod
    def backward(grad, context, values, attrs):
        raise NotImplementedError


class MatMul(Primitive):
    arity = (2, 2)

    @classmethod
    def validate(cls, kind, values, attrs):
        a, b = values
        _require_ndim(kind, a, 2)
        _require_ndim(kind, b, 2)
        inner_a = a.shape[0] if attrs.get("transpose_a", False) else a.shape[1]
        inner_b = b.shape[1] if attrs.get("transpose_b", False) else b.shape[0]
        if inner_a != inner_b:
            raise ShapeError("`matmul` inner dimensions differ", [a.shape, b.shape])

    @staticmethod
    def forward(values, attrs):
        a, b = values
        left = a.T if attrs.get("transpose_a", False) else a
        right = b.T if attrs.get("transpose_b", False) else b
        return np.matmul(left, right), None

    @staticmethod
    def backward(grad, context, values, attrs):
        a, b = values
        left = a.T if attrs.get("transpose_a", False) else a
        right = b.T if attrs.get("transpose_b", False) else b
        grad_left = np.matmul(grad, right.T)
        grad_right = np.matmul(left.T, grad)
        grad_a = grad_left.T if attrs.get("transpose_a", False) else grad_left
        grad_b = grad_right.T if attrs.get("transpose_b", False) else grad_right
        return grad_a, grad_b


class Conv2d(Primitive):
    arity = (2, 3)

    @classmethod
    def validate(cls, kind, values, attrs):
        x, w = values[0], values[1]
        _require_ndim(kind, x, 4)
        _require_ndim(kind, w, 4)
        stride = attrs.get("stride", 1)
        padding = attrs.get("padding", 0)
        if not isinstance(stride, numbers.Integral) or stride < 1:
            raise InvalidAttributeError("`stride` must be a positive integer, got {!r}".format(stride))
        if not isinstance(padding, numbers.Integral) or padding < 0:
            raise InvalidAttributeError("`padding` must be a non-negative integer, got {!r}".format(padding))
        if x.shape[1] != w.shape[1]:
            raise ShapeError("`conv2d` input channels differ from kernel channels", [x.shape, w.shape])
        if len(values) == 3 and values[2].shape != (w.shape[0],):
            raise ShapeError("`conv2d` bias must have one entry per output channel",
                [w.shape, values[2].shape])
        if x.shape[2] + 2 * padding < w.shape[2] or x.shape[3] + 2 * padding < w.shape[3]:
            raise ShapeError("`conv2d` kernel is larger than the padded input", [x.shape, w.shape])

    @staticmethod
    def forward(values, attrs):
        x, w = values[0], values[1]
        stride = attrs.get("stride", 1)
        padding = attrs.get("padding", 0)
        padded = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding))) if padding else x
        windows = sliding_window_view(padded, w.shape[2:], axis=(2, 3))[:, :, ::stride, ::stride]
        out = np.tensordot(windows, w, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
        if len(values) == 3:
            out = out + values[2].reshape(1, -1, 1, 1)
        return np.ascontiguousarray(out), {"windows": windows, "padded_shape": padded.shape}

    @staticmethod
    def backward(grad, context, values, attrs):
        x, w = values[0], values[1]
        stride = attrs.get("stride", 1)
        padding = attrs.get("padding", 0)
        windows = context["windows"]
        out_h, out_w = grad.shape[2], grad.shape[3]

        grad_w = np.tensordot(grad, windows, axes=([0, 2, 3], [0, 2, 3]))
        grad_padded = np.zeros(context["padded_shape"], dtype=grad.dtype)
        for i in range(w.shape[2]):
            for j in range(w.shape[3]):
                contribution = np.tensordot(grad, w[:, :, i, j], axes=([1], [0])).transpose(0, 3, 1, 2)
                grad_padded[:, :, i:i + stride * (out_h - 1) + 1:stride,
                    j:j + stride * (out_w - 1) + 1:stride] += contribution
        grad_x = grad_padded[:, :, padding:padding + x.shape[2], padding:padding + x.shape[3]]
        grads = [np.ascontiguousarray(grad_x), grad_w]
        if len(values) == 3:
            grads.append(grad.sum(axis=(0, 2, 3)))
        return tuple(grads)


class Relu(Primitive):

    @staticmethod
    def forward(values, attrs):
        x = values[0]
        mask = x > 0
        return np.where(mask, x, np.zeros_like(x)), {"mask": mask}

    @staticmethod
    def backward(grad, context, values, attrs):
        # Gradient at exactly zero is zero.
        return (np.where(context["mask"], grad, np.zeros_like(grad)),)


class Dropout(Primitive):

    @classmethod
    def validate(cls, kind, values, attrs):
        rate = attrs.get("rate", 0.0)
        if not 0.0 <= rate < 1.0:
            raise InvalidAttributeError("`rate` must lie in [0, 1), got {!r}".format(rate))
        if attrs.get("training", False) and rate > 0.0 and attrs.get("stream") is None:
            raise InvalidAttributeError("`stream` is required for an active dropout")

    @staticmethod
    def forward(values, attrs):
        x = values[0]
        rate = attrs.get("rate", 0.0)
        if not attrs.get("training", False) or rate == 0.0:
            return np.array(x), {"mask": None}
        keep = attrs["stream"].random(x.shape) >= rate
        mask = keep.astype(x.dtype) / x.dtype.type(1.0 - rate)
        return x * mask, {"mask": mask}

    @staticmethod
    def backward(grad, context, values, attrs):
        if context["mask"] is None:
            return (grad,)
        return (grad * context["mask"],)


class BatchNorm(Primitive):
    arity = (3, 3)

    @classmethod
    def validate(cls, kind, values, attrs):
        x, gamma, beta = values
        if x.ndim not in (2, 4):
            raise ShapeError("`batch_norm` expects a 2-d or 4-d input", [x.shape])
        features = x.shape[1]
        if gamma.shape != (features,) or beta.shape != (features,):
            raise ShapeError("`batch_norm` scale and shift must have one entry per feature",
                [x.shape, gamma.shape, beta.shape])
        if attrs.get("epsilon", 1e-5) <= 0:
            raise InvalidAttributeError("`epsilon` must be positive")
        if not 0.0 <= attrs.get("momentum", 0.1) <= 1.0:
            raise InvalidAttributeError("`momentum` must lie in [0, 1]")
        running = attrs.get("running")
        if running is None:
            raise InvalidAttributeError("`running` statistics are required")
        if running["mean"].shape != (features,) or running["var"].shape != (features,):
            raise ShapeError("`batch_norm` running statistics must have one entry per feature",
                [x.shape, running["mean"].shape, running["var"].shape])

    @staticmethod
    def _layout(x):
        if x.ndim == 2:
            return (0,), (1, -1)
        return (0, 2, 3), (1, -1, 1, 1)

    @staticmethod
    def forward(values, attrs):
        x, gamma, beta = values
        epsilon = attrs.get("epsilon", 1e-5)
        momentum = attrs.get("momentum", 0.1)
        running = attrs["running"]
        axes, view = BatchNorm._layout(x)
        if attrs.get("training", False):
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            count = x.size // x.shape[1]
            unbiased = var * count / (count - 1) if count > 1 else var
            running["mean"] = (1.0 - momentum) * running["mean"] + momentum * mean
            running["var"] = (1.0 - momentum) * running["var"] + momentum * unbiased
        else:
            mean = running["mean"].astype(x.dtype)
            var = running["var"].astype(x.dtype)
        inv_std = 1.0 / np.sqrt(var + epsilon)
        normalized = (x - mean.reshape(view)) * inv_std.reshape(view)
        out = gamma.reshape(view) * normalized + beta.reshape(view)
        return out, {"normalized": normalized, "inv_std": inv_std}

    @staticmethod
    def backward(grad, context, values, attrs):
        x, gamma, beta = values
        axes, view = BatchNorm._layout(x)
        normalized = context["normalized"]
        inv_std = context["inv_std"].reshape(view)
        grad_gamma = (grad * normalized).sum(axis=axes)
        grad_beta = grad.sum(axis=axes)
        grad_normalized = grad * gamma.reshape(view)
        if attrs.get("training", False):
            count = x.size // x.shape[1]
            grad_x = inv_std / count * (count * grad_normalized
                - grad_normalized.sum(axis=axes, keepdims=True)
                - normalized * (grad_normalized * normalized).sum(axis=axes, keepdims=True))
        else:
            grad_x = grad_normalized * inv_std
        return grad_x, grad_gamma, grad_beta


class GlobalAvgPool(Primitive):

    @classmethod
    def validate(cls, kind, values, attrs):
        _require_ndim(kind, values[0], 4)

    @staticmethod
    def forward(values, attrs):
        return values[0].mean(axis=(2, 3)), None

    @staticmethod
    def backward(grad, context, values, attrs):
        x = values[0]
        area = x.shape[2] * x.shape[3]
        return (np.broadcast_to((grad / area)[:, :, None, None], x.shape).copy(),)


class Add(Primitive):
    arity = (2, 2)

    @classmethod
    def validate(cls, kind, values, attrs):
        _broadcast_shape(kind, values[0], values[1])

    @staticmethod
    def forward(values, attrs):
        return values[0] + values[1], None

    @staticmethod
    def backward(grad, context, values, attrs):
        return grad, _unbroadcast(grad, values[1].shape)


class Mul(Primitive):
    arity = (2, 2)

    @classmethod
    def validate(cls, kind, values, attrs):
        _broadcast_shape(kind, values[0], values[1])

    @staticmethod
    def forward(values, attrs):
        return values[0] * values[1], None

    @staticmethod
    def backward(grad, context, values, attrs):
        a, b = values
        return grad * b, _unbroadcast(grad * a, b.shape)


class Scale(Primitive):

    @classmethod
    def validate(cls, kind, values, attrs):
        factor = attrs.get("factor")
        if not isinstance(factor, numbers.Real) or not np.isfinite(factor):
            raise InvalidAttributeError("`factor` must be a finite real number, got {!r}".format(factor))

    @staticmethod
    def forward(values, attrs):
        x = values[0]
        return x * x.dtype.type(attrs["factor"]), None

    @staticmethod
    def backward(grad, context, values, attrs):
        return (grad * grad.dtype.type(attrs["factor"]),)


class Reshape(Primitive):

    @classmethod
    def validate(cls, kind, values, attrs):
        try:
            np.empty(values[0].shape, dtype=np.bool_).reshape(attrs.get("shape"))
        except (TypeError, ValueError):
            raise ShapeError("`reshape` target is incompatible", [values[0].shape, tuple(attrs.get("shape") or ())])

    @staticmethod
    def forward(values, attrs):
        return np.array(values[0].reshape(attrs["shape"])), None

    @staticmethod
    def backward(grad, context, values, attrs):
        return (grad.reshape(values[0].shape),)


class Flatten(Primitive):

    @classmethod
    def validate(cls, kind, values, attrs):
        if values[0].ndim < 2:
            raise ShapeError("`flatten` expects a batch dimension", [values[0].shape])

    @staticmethod
    def forward(values, attrs):
        x = values[0]
        return np.array(x.reshape(x.shape[0], -1)), None

    @staticmethod
    def backward(grad, context, values, attrs):
        return (grad.reshape(values[0].shape),)


class RowL2Normalize(Primitive):

    @classmethod
    def validate(cls, kind, values, attrs):
        _require_ndim(kind, values[0], 2)

    @staticmethod
    def forward(values, attrs):
        x = values[0]
        epsilon = attrs.get("epsilon", 1e-12)
        norm = np.sqrt((x * x).sum(axis=1, keepdims=True))
        clamped = np.maximum(norm, epsilon)
        out = x / clamped
        return out, {"norm": clamped, "active": norm > epsilon, "out": out}

    @staticmethod
    def backward(grad, context, values, attrs):
        out = context["out"]
        norm = context["norm"]
        radial = (grad * out).sum(axis=1, keepdims=True) * context["active"]
        return ((grad - out * radial) / norm,)


class LogSoftmax(Primitive):

    @classmethod
    def validate(cls, kind, values, attrs):
        x = values[0]
        _require_ndim(kind, x, 2)
        mask = attrs.get("mask")
        if mask is not None:
            if mask.shape != x.shape:
                raise ShapeError("`log_softmax` mask must match its input", [x.shape, mask.shape])
            if np.any(mask.all(axis=1)):
                raise InvalidAttributeError("`log_softmax` mask excludes every entry of a row")

    @staticmethod
    def forward(values, attrs):
        x = values[0]
        mask = attrs.get("mask")
        if mask is None:
            mask = np.zeros(x.shape, dtype=np.bool_)
        included = np.where(mask, -np.inf, x)
        shift = included.max(axis=1, keepdims=True)
        exps = np.exp(included - shift)
        total = exps.sum(axis=1, keepdims=True)
        out = np.where(mask, np.zeros_like(x), x - (shift + np.log(total)))
        return out, {"softmax": exps / total, "mask": mask}

    @staticmethod
    def backward(grad, context, values, attrs):
        kept = np.where(context["mask"], np.zeros_like(grad), grad)
        return (kept - context["softmax"] * kept.sum(axis=1, keepdims=True),)


class _Reduce(Primitive):

    @classmethod
    def validate(cls, kind, values, attrs):
        axis = attrs.get("axis")
        if axis is None:
            return
        axes = axis if isinstance(axis, tuple) else (axis,)
        for item in axes:
            if not isinstance(item, numbers.Integral) or not -values[0].ndim <= item < values[0].ndim:
                raise InvalidAttributeError("`axis` {!r} is out of range".format(axis))

    @staticmethod
    def _expand(grad, values, attrs):
        x = values[0]
        axis = attrs.get("axis")
        if axis is None:
            return np.broadcast_to(grad, x.shape).copy()
        if not attrs.get("keepdims", False):
            axes = axis if isinstance(axis, tuple) else (axis,)
            grad = np.expand_dims(grad, tuple(item % x.ndim for item in axes))
        return np.broadcast_to(grad, x.shape).copy()


class ReduceSum(_Reduce):

    @staticmethod
    def forward(values, attrs):
        return np.asarray(values[0].sum(axis=attrs.get("axis"), keepdims=attrs.get("keepdims", False))), None

    @staticmethod
    def backward(grad, context, values, attrs):
        return (_Reduce._expand(grad, values, attrs),)


class ReduceMean(_Reduce):

    @staticmethod
    def forward(values, attrs):
        return np.asarray(values[0].mean(axis=attrs.get("axis"), keepdims=attrs.get("keepdims", False))), None

    @staticmethod
    def backward(grad, context, values, attrs):
        x = values[0]
        out_size = grad.size
        return (_Reduce._expand(grad, values, attrs) * (out_size / x.size),)


PRIMITIVES = {
    "matmul": MatMul,
    "conv2d": Conv2d,
    "relu": Relu,
    "dropout": Dropout,
    "batch_norm": BatchNorm,
    "global_avg_pool": GlobalAvgPool,
    "add": Add,
    "mul": Mul,
    "scale": Scale,
    "reshape": Reshape,
    "flatten": Flatten,
    "row_l2_normalize": RowL2Normalize,
    "log_softmax": LogSoftmax,
    "reduce_sum": ReduceSum,
    "reduce_mean": ReduceMean,
}


def apply_primitive(kind, inputs, attrs=None, tape=None):
    """Applies a primitive to its input tensors.

    The output is appended to ``tape`` when a recording tape is given; otherwise the primitive is
    evaluated without recording.

    Parameters:
        kind (str): One of the keys of :data:`PRIMITIVES`.
        inputs (list): The input :class:`depthcontrast.Autograd.Tensor.Tensor` objects.
        attrs (dict, optional): The primitive attributes (``stride``, ``padding``, ``rate``,
            ``training``, ``stream``, ``momentum``, ``epsilon``, ``running``, ``factor``,
            ``shape``, ``axis``, ``keepdims``, ``mask``, ``transpose_a``, ``transpose_b``).
        tape (depthcontrast.Autograd.Tape.Tape, optional): The tape on which to record.

    Returns:
        :class:`depthcontrast.Autograd.Tensor.Tensor`: The output tensor.

    Raises:
        AssertionError: If the input parameters are invalid.
        :class:`depthcontrast.Exceptions.ShapeError`: If the input shapes are not compatible with
            the primitive.
        :class:`depthcontrast.Exceptions.InvalidAttributeError`: If an attribute is out of range.
        :class:`depthcontrast.Exceptions.NumericalError`: If the output is not finite.

    Example:
        This example evaluates a relu without recording it::

            import numpy as np
            from depthcontrast.Autograd import Tensor, apply_primitive

            out = apply_primitive("relu", [Tensor(np.array([-1.0, 0.0, 2.0]))])
            print(out.values)  # [0. 0. 2.]
    """
    assert kind in PRIMITIVES, "`kind` must be one of " + ", ".join(sorted(PRIMITIVES))
    assert all(isinstance(tensor, Tensor) for tensor in inputs), "`inputs` must be tensors."
    attrs = {} if attrs is None else attrs
    primitive = PRIMITIVES[kind]
    low, high = primitive.arity
    if not low <= len(inputs) <= high:
        raise ShapeError("`{}` takes {} to {} inputs".format(kind, low, high),
            [tensor.shape for tensor in inputs])

    values = [tensor.values for tensor in inputs]
    primitive.validate(kind, values, attrs)
    out, context = primitive.forward(values, attrs)
    out = np.asarray(out)
    if not np.all(np.isfinite(out)):
        raise NumericalError("`" + kind + "` produced non-finite values")

    requires_grad = tape is not None and tape.enabled and any(tensor.requires_grad for tensor in inputs)
    output = Tensor._wrap(out, requires_grad)
    if tape is not None:
        tape.record(kind, inputs, output, attrs, context)
    return output
