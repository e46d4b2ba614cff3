__all__ = [
    'tiny_params',
    'corrupted_matmul',
    'gradient_suite',
]

import contextlib
import logging

import numpy as np

from .Autograd import grad_check
from .Autograd import Primitives
from .Contrastive import ContrastiveConfig, EmbeddingBatch, nt_xent_loss
from .Models import (ClassifierHeadConfig, EncoderConfig, ProjectionHeadConfig, classifier_forward,
    encoder_forward, init_params, projector_forward)

logger = logging.getLogger(__name__)

TINY_PAIRS = 4
TINY_SIZE = 8
DROPOUT_SEED = 11


def tiny_params(seed=0):
    """Returns small parameters for gradient checks: a two-stage encoder on 8 x 8 inputs, a
    two-layer projection head with batch normalization and a narrow classification head.
    """
    return init_params(
        EncoderConfig(input_channels=3, stages=((4, 3, 2), (6, 3, 2))),
        ProjectionHeadConfig(hidden_sizes=(8, 6), output_dim=4),
        ClassifierHeadConfig(hidden=6, dropout_rate=0.3, num_classes=7),
        seed)


class _CorruptedMatMul(Primitives.MatMul):

    @staticmethod
    def backward(grad, context, values, attrs):
        grad_a, grad_b = Primitives.MatMul.backward(grad, context, values, attrs)
        return grad_a * 1.1, grad_b


@contextlib.contextmanager
def corrupted_matmul():
    """Scales the first-operand gradient of ``matmul`` by 1.1 while the context is active; a
    negative control for :func:`gradient_suite`.
    """
    original = Primitives.PRIMITIVES["matmul"]
    Primitives.PRIMITIVES["matmul"] = _CorruptedMatMul
    try:
        yield
    finally:
        Primitives.PRIMITIVES["matmul"] = original


def _bind(tape, values):
    for name, value in values.items():
        tape.param(name, value)


def gradient_suite(eps=1e-5, tol=1e-4, seed=0):
    """Checks the gradients of the full pretraining loss and of the classification loss.

    The contrastive path runs ``2 x 4`` random 8 x 8 views through the encoder and the projection
    head (batch statistics) into the contrastive loss. The classification path runs four inputs
    through the encoder and the classification head with an active dropout whose stream is
    recreated for every evaluation.

    Parameters:
        eps (float, optional): The central-difference step.
        tol (float, optional): The largest accepted relative error.
        seed (int, optional): The seed of the parameters and inputs.

    Returns:
        list: ``(path, report)`` tuples, with ``path`` in ``contrastive`` and ``classification``
        and ``report`` a :class:`depthcontrast.Autograd.GradCheck.CheckReport`.
    """
    params = tiny_params(seed)
    rng = np.random.default_rng(seed)
    views = rng.standard_normal((2 * TINY_PAIRS, 3, TINY_SIZE, TINY_SIZE))
    images = rng.standard_normal((TINY_PAIRS, 3, TINY_SIZE, TINY_SIZE))
    labels = np.array([0, 3, 5, 6])
    onehot = np.zeros((TINY_PAIRS, 7))
    onehot[np.arange(TINY_PAIRS), labels] = 1.0

    def contrastive(values, tape):
        _bind(tape, values)
        model = params.copy()
        h = encoder_forward(model, views, tape, training=True)
        z = projector_forward(model, h, tape, training=True)
        loss, _ = nt_xent_loss(EmbeddingBatch(z, TINY_PAIRS, tape), ContrastiveConfig(0.1))
        return loss

    def classification(values, tape):
        _bind(tape, values)
        model = params.copy()
        h = encoder_forward(model, images, tape, training=True)
        logits = classifier_forward(model, h, tape, training=True, stream=np.random.default_rng(DROPOUT_SEED))
        picked = tape.apply("mul", tape.apply("log_softmax", logits), tape.constant(onehot))
        return tape.apply("reduce_mean", tape.apply("scale", tape.apply("reduce_sum", picked, axis=1), factor=-1.0))

    suites = [
        ("contrastive", contrastive, params.names("encoder") + params.names("projector")),
        ("classification", classification, params.names("encoder") + params.names("classifier")),
    ]
    results = []
    for path, function, names in suites:
        report = grad_check(function, {name: params.tensors[name] for name in names}, eps=eps, tol=tol)
        logger.info("%s path: worst %s %.3e", path, report.worst.name, report.worst.max_rel_error)
        results.append((path, report))
    return results
