__all__ = [
    'ParameterCheck',
    'CheckReport',
    'grad_check',
]

import logging

import numpy as np

from ..Exceptions import TapeError
from .Tape import Tape

logger = logging.getLogger(__name__)


class ParameterCheck(object):
    """

    The comparison of analytic and central-difference gradients for one parameter.

    Attributes:
        name (str): The parameter name (readonly).
        max_rel_error (float): The largest relative error over the checked entries (readonly).
        mean_rel_error (float): The mean relative error over the checked entries (readonly).
        checked (int): The number of compared entries (readonly).
        skipped (int): The number of entries whose perturbation crossed a relu kink (readonly).
        passed (bool): Whether ``max_rel_error`` is within tolerance (readonly).

    """

    def __init__(self, name, errors, skipped, tol):
        self._name = name
        self._max = float(np.max(errors)) if len(errors) else 0.0
        self._mean = float(np.mean(errors)) if len(errors) else 0.0
        self._checked = len(errors)
        self._skipped = skipped
        self._passed = self._max <= tol

    def __repr__(self):
        return 'ParameterCheck({!r}, max={:.3e}, mean={:.3e}, checked={}, skipped={})'.format(
            self._name, self._max, self._mean, self._checked, self._skipped)

    @property
    def name(self):
        return self._name

    @property
    def max_rel_error(self):
        return self._max

    @property
    def mean_rel_error(self):
        return self._mean

    @property
    def checked(self):
        return self._checked

    @property
    def skipped(self):
        return self._skipped

    @property
    def passed(self):
        return self._passed


class CheckReport(object):
    """

    The result of :func:`grad_check`.

    Attributes:
        parameters (list): One :class:`ParameterCheck` per parameter, in input order (readonly).
        passed (bool): Whether every parameter passed (readonly).
        worst (ParameterCheck): The parameter with the largest relative error (readonly).
        tol (float): The tolerance that was applied (readonly).

    """

    def __init__(self, parameters, tol):
        self._parameters = list(parameters)
        self._tol = tol

    @property
    def parameters(self):
        return list(self._parameters)

    @property
    def passed(self):
        return all(check.passed for check in self._parameters)

    @property
    def worst(self):
        return max(self._parameters, key=lambda check: check.max_rel_error)

    @property
    def tol(self):
        return self._tol

    def __getitem__(self, name):
        for check in self._parameters:
            if check.name == name:
                return check
        raise KeyError(name)

    def to_rows(self):
        """Returns the report as table rows.

        Returns:
            list: Rows ``(name, max_rel_error, mean_rel_error, checked, skipped, status)``.
        """
        return [(check.name, check.max_rel_error, check.mean_rel_error, check.checked, check.skipped,
            "pass" if check.passed else "FAIL") for check in self._parameters]


def _evaluate(function, params, dtype):
    tape = Tape(dtype=dtype)
    out = function(params, tape)
    if out.size != 1 or out.ndim > 1:
        raise TapeError("checked function must return a scalar, got shape {!r}".format(out.shape))
    return tape, out

def grad_check(function, params, eps=1e-5, tol=1e-4, floor=1e-6, dtype=np.float64):
    """Compares analytic gradients with central differences.

    ``function(params, tape)`` must build its computation on ``tape``, binding every entry of
    ``params`` with ``tape.param(name, params[name])``, and return a scalar tensor. Any source of
    randomness (dropout streams) has to be recreated inside ``function`` so that every evaluation
    sees the same draws.

    The relative error of an entry is ``|a - n| / max(|a|, |n|, floor)``. An entry is skipped, and
    counted, when the ``+eps`` and ``-eps`` evaluations disagree on the activity pattern of any
    relu, i.e. the difference straddles a point where the function is not differentiable.

    Parameters:
        function (callable): The tape-building closure.
        params (dict): A dictionary mapping parameter names to ``numpy.ndarray`` values.
        eps (float, optional): The perturbation step.
        tol (float, optional): The largest accepted relative error.
        floor (float, optional): The smallest denominator of the relative error.
        dtype (numpy.dtype, optional): The evaluation width.

    Returns:
        :class:`CheckReport`: The per-parameter comparison.

    Raises:
        AssertionError: If the input parameters are invalid.
        :class:`depthcontrast.Exceptions.TapeError`: If the function does not return a scalar.

    Example:
        This example checks the derivative of ``x * x`` at 3::

            import numpy as np
            from depthcontrast.Autograd import grad_check

            def square(params, tape):
                x = tape.param("x", params["x"])
                return tape.apply("reduce_sum", tape.apply("mul", x, x))

            report = grad_check(square, {"x": np.array([3.0])})
            assert report.passed
    """
    assert callable(function), "`function` is required as a callable."
    assert isinstance(params, dict), "`params` is required as a dict."
    assert eps > 0, "`eps` must be positive."

    base = {name: np.array(value, dtype=dtype) for name, value in params.items()}
    tape, out = _evaluate(function, base, dtype)
    tape.backward(out)
    analytic = tape.param_grads()

    checks = []
    for name, value in base.items():
        grad = analytic.get(name, np.zeros(value.shape, dtype=dtype))
        errors = []
        skipped = 0
        for index in np.ndindex(value.shape):
            original = value[index]
            value[index] = original + eps
            plus_tape, plus = _evaluate(function, base, dtype)
            value[index] = original - eps
            minus_tape, minus = _evaluate(function, base, dtype)
            value[index] = original

            plus_masks = plus_tape.relu_masks()
            minus_masks = minus_tape.relu_masks()
            if len(plus_masks) != len(minus_masks) or any(
                    not np.array_equal(a, b) for a, b in zip(plus_masks, minus_masks)):
                skipped += 1
                logger.debug("skipping %s%s: perturbation crosses a relu kink", name, index)
                continue

            numeric = (plus.item() - minus.item()) / (2.0 * eps)
            exact = float(grad[index])
            errors.append(abs(exact - numeric) / max(abs(exact), abs(numeric), floor))
        checks.append(ParameterCheck(name, errors, skipped, tol))
    return CheckReport(checks, tol)
