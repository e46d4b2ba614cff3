__all__ = [
    'AdamState',
    'adam_step',
]

import numpy as np

from ..Exceptions import NumericalError, ShapeError

BETA1 = 0.9
BETA2 = 0.999
EPSILON = 1e-8


class AdamState(object):
    """

    The moment estimates of the Adam optimizer.

    Attributes:
        m (dict): Parameter name to first moment (readonly).
        v (dict): Parameter name to second moment (readonly).
        t (int): The number of completed steps (readonly).
        beta1 (float): The first moment decay (readonly).
        beta2 (float): The second moment decay (readonly).
        epsilon (float): The denominator offset (readonly).

    """

    def __init__(self, beta1=BETA1, beta2=BETA2, epsilon=EPSILON):
        self._m = {}
        self._v = {}
        self._t = 0
        self._beta1 = beta1
        self._beta2 = beta2
        self._epsilon = epsilon

    def __repr__(self):
        return 'AdamState(t={!r}, parameters={})'.format(self._t, len(self._m))

    @property
    def m(self):
        return self._m

    @property
    def v(self):
        return self._v

    @property
    def t(self):
        return self._t

    @property
    def beta1(self):
        return self._beta1

    @property
    def beta2(self):
        return self._beta2

    @property
    def epsilon(self):
        return self._epsilon


def adam_step(params, grads, state, lr):
    """Applies one Adam update to the named parameters that have a gradient.

    ``m = b1 m + (1 - b1) g``, ``v = b2 v + (1 - b2) g^2``, and with the bias-corrected estimates
    ``theta = theta - lr m_hat / (sqrt(v_hat) + eps)``. Parameter arrays are replaced, never
    modified in place. Nothing is updated when any gradient is not finite.

    Parameters:
        params (dict): Parameter name to ``numpy.ndarray``; usually ``ModelParams.tensors``.
        grads (dict): Parameter name to gradient; names absent here are left untouched.
        state (AdamState): The optimizer state; updated in place.
        lr (float): The step size.

    Returns:
        dict: ``params``, with the updated arrays.

    Raises:
        AssertionError: If the input parameters are invalid.
        :class:`depthcontrast.Exceptions.ShapeError`: If a gradient does not match its parameter.
        :class:`depthcontrast.Exceptions.NumericalError`: If a gradient is not finite.

    Example:
        This example takes one step on a single parameter::

            import numpy as np
            from depthcontrast.Training import AdamState, adam_step

            params = {"w": np.array([1.0])}
            adam_step(params, {"w": np.array([1.0])}, AdamState(), lr=0.1)
            print(params["w"])  # [0.9]
    """
    assert isinstance(state, AdamState), "`state` is required as an AdamState."
    assert lr > 0, "`lr` must be positive."
    for name, grad in grads.items():
        if name not in params:
            raise ShapeError("gradient for unknown parameter " + name, [np.shape(grad)])
        if np.shape(grad) != params[name].shape:
            raise ShapeError("gradient of {} does not match its parameter".format(name),
                [np.shape(grad), params[name].shape])
        if not np.all(np.isfinite(grad)):
            raise NumericalError("gradient of {} is not finite".format(name))

    state._t += 1
    t = state.t
    correction1 = 1.0 - state.beta1 ** t
    correction2 = 1.0 - state.beta2 ** t
    for name, grad in grads.items():
        grad = np.asarray(grad, dtype=np.float64)
        m = state.m.get(name, np.zeros_like(grad))
        v = state.v.get(name, np.zeros_like(grad))
        m = state.beta1 * m + (1.0 - state.beta1) * grad
        v = state.beta2 * v + (1.0 - state.beta2) * grad * grad
        state.m[name] = m
        state.v[name] = v
        params[name] = params[name] - lr * (m / correction1) / (np.sqrt(v / correction2) + state.epsilon)
    return params
