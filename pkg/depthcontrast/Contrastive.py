__all__ = [
    'ContrastiveConfig',
    'EmbeddingBatch',
    'build_embedding_batch',
    'positive_index',
    'similarity_matrix',
    'nt_xent_loss',
]

import logging

import numpy as np

from .Autograd import Tape, Tensor
from .Exceptions import InvalidConfigError, NumericalError, ShapeError

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-6


class ContrastiveConfig(object):
    """

    The settings of the normalized temperature-scaled cross entropy loss.

    Attributes:
        tau (float): The temperature (readonly).

    """

    def __init__(self, tau=0.1):
        """Initializes the ContrastiveConfig class.

        Parameters:
            tau (float, optional): The temperature; must be positive.

        Raises:
            :class:`depthcontrast.Exceptions.InvalidConfigError`: If ``tau`` is not positive.
        """
        if isinstance(tau, bool) or not isinstance(tau, (int, float)) or not tau > 0 or not np.isfinite(tau):
            raise InvalidConfigError("`tau` must be a positive number, got {!r}".format(tau))
        self._tau = float(tau)

    def __repr__(self):
        return 'ContrastiveConfig(tau={!r})'.format(self._tau)

    @property
    def tau(self):
        return self._tau

    def to_dict(self):
        return {"tau": self._tau}


class EmbeddingBatch(object):
    """

    A ``2N x D`` embedding matrix whose rows ``0..N-1`` come from reflectance views and rows
    ``N..2N-1`` from depth views. Row ``i`` and row ``i + N`` form a positive pair.

    Attributes:
        Z (depthcontrast.Autograd.Tensor.Tensor): The stacked embeddings (readonly).
        n (int): The number of pairs ``N`` (readonly).
        tape (depthcontrast.Autograd.Tape.Tape): The tape the batch was built on (readonly).

    """

    def __init__(self, Z, n, tape):
        self._Z = Z
        self._n = n
        self._tape = tape

    def __repr__(self):
        return 'EmbeddingBatch(n={!r}, shape={!r})'.format(self._n, self._Z.shape)

    @property
    def Z(self):
        return self._Z

    @property
    def n(self):
        return self._n

    @property
    def tape(self):
        return self._tape

    def reference(self):
        """Returns a copy of the reflectance block, rows ``0..N-1``."""
        return self._Z.numpy()[:self._n]

    def depth(self):
        """Returns a copy of the depth block, rows ``N..2N-1``."""
        return self._Z.numpy()[self._n:]


def positive_index(i, n):
    """Returns the row paired with row ``i`` in a batch of ``n`` pairs."""
    assert 0 <= i < 2 * n, "`i` must lie in [0, 2n)."
    return i + n if i < n else i - n


def _tensor(tape, values):
    if isinstance(values, Tensor):
        return values
    return tape.constant(values)


def build_embedding_batch(z_ref, z_dep, tape=None):
    """Stacks the reflectance and depth embeddings into one contrastive batch.

    The stacking is expressed with two selection products, ``[I; 0] z_ref + [0; I] z_dep``, so that
    gradients reach both inputs through recorded primitives. The values are copied exactly.

    Parameters:
        z_ref (numpy.ndarray or depthcontrast.Autograd.Tensor.Tensor): The ``N x D`` reflectance
            embeddings.
        z_dep (numpy.ndarray or depthcontrast.Autograd.Tensor.Tensor): The ``N x D`` depth
            embeddings.
        tape (depthcontrast.Autograd.Tape.Tape, optional): The tape to record on; a disabled tape
            is used when omitted.

    Returns:
        :class:`EmbeddingBatch`: The ``2N x D`` batch.

    Raises:
        :class:`depthcontrast.Exceptions.ShapeError`: If the shapes differ or are not matrices.
        :class:`depthcontrast.Exceptions.NumericalError`: If an embedding is not finite.

    Example:
        This example builds a batch of two pairs::

            import numpy as np
            from depthcontrast.Contrastive import build_embedding_batch

            batch = build_embedding_batch(np.eye(2), np.eye(2))
            print(batch.Z.values)  # rows ref0, ref1, dep0, dep1
    """
    tape = tape if tape is not None else Tape(enabled=False)
    z_ref = _tensor(tape, z_ref)
    z_dep = _tensor(tape, z_dep)
    if z_ref.ndim != 2 or z_ref.shape != z_dep.shape:
        raise ShapeError("reference and depth embeddings must be matrices of equal shape",
            [z_ref.shape, z_dep.shape])
    n = z_ref.shape[0]
    upper = np.zeros((2 * n, n))
    upper[:n] = np.eye(n)
    lower = np.zeros((2 * n, n))
    lower[n:] = np.eye(n)
    Z = tape.apply("add", tape.apply("matmul", tape.constant(upper), z_ref),
        tape.apply("matmul", tape.constant(lower), z_dep))
    return EmbeddingBatch(Z, n, tape)


def similarity_matrix(Z_normalized, tape=None):
    """Computes all pairwise dot products of row-normalized embeddings.

    Parameters:
        Z_normalized (numpy.ndarray or depthcontrast.Autograd.Tensor.Tensor): A ``2N x D`` matrix
            whose rows have unit Euclidean norm.
        tape (depthcontrast.Autograd.Tape.Tape, optional): The tape to record on.

    Returns:
        :class:`depthcontrast.Autograd.Tensor.Tensor`: The symmetric ``2N x 2N`` similarities.

    Raises:
        :class:`depthcontrast.Exceptions.NumericalError`: If a row norm deviates from 1 by more
            than 1e-6; the message carries the largest deviation.
    """
    tape = tape if tape is not None else Tape(enabled=False)
    Z = _tensor(tape, Z_normalized)
    if Z.ndim != 2:
        raise ShapeError("similarity needs a matrix", [Z.shape])
    deviation = float(np.max(np.abs(np.linalg.norm(Z.values, axis=1) - 1.0)))
    if deviation > NORM_TOLERANCE:
        raise NumericalError("rows are not unit-norm (max deviation {:.3e})".format(deviation))
    return tape.apply("matmul", Z, Z, transpose_b=True)


def nt_xent_loss(batch, config=None):
    """Computes the normalized temperature-scaled cross entropy over both pair directions.

    Rows are L2-normalized first. For every anchor row ``i`` the positive is row
    ``positive_index(i, N)`` and the denominator sums ``exp(sim / tau)`` over the other ``2N - 1``
    rows, the positive included. The log-softmax is max-shifted, so nothing overflows.

    Parameters:
        batch (EmbeddingBatch): The contrastive batch.
        config (ContrastiveConfig, optional): The loss settings; ``tau = 0.1`` when omitted.

    Returns:
        tuple: The scalar mean loss and the ``2N`` directed losses, both as
        :class:`depthcontrast.Autograd.Tensor.Tensor` objects recorded on ``batch.tape``.

    Raises:
        AssertionError: If the input parameters are invalid.

    Example:
        This example evaluates two orthogonal pairs at unit temperature::

            import numpy as np
            from depthcontrast.Contrastive import (ContrastiveConfig, build_embedding_batch,
                nt_xent_loss)

            batch = build_embedding_batch(np.eye(2), np.eye(2))
            loss, per_pair = nt_xent_loss(batch, ContrastiveConfig(tau=1.0))
            print(loss.item())  # 0.551445...
    """
    assert isinstance(batch, EmbeddingBatch), "`batch` is required as an EmbeddingBatch."
    config = config if config is not None else ContrastiveConfig()
    assert isinstance(config, ContrastiveConfig), "`config` is required as a ContrastiveConfig."
    n = batch.n
    if n == 1:
        logger.warning("contrastive batch holds a single pair; there are no negatives")
    tape = batch.tape
    count = 2 * n
    positives = np.zeros((count, count))
    positives[np.arange(count), [positive_index(i, n) for i in range(count)]] = 1.0

    normalized = tape.apply("row_l2_normalize", batch.Z)
    similarities = tape.apply("matmul", normalized, normalized, transpose_b=True)
    logits = tape.apply("scale", similarities, factor=1.0 / config.tau)
    log_probs = tape.apply("log_softmax", logits, mask=np.eye(count, dtype=np.bool_))
    picked = tape.apply("mul", log_probs, tape.constant(positives))
    per_pair = tape.apply("scale", tape.apply("reduce_sum", picked, axis=1), factor=-1.0)
    loss = tape.apply("reduce_mean", per_pair)
    return loss, per_pair
