__all__ = [
    'pretrain',
    'finetune',
    'linear_eval',
    'evaluate',
]

import logging

import numpy as np

from ..Augment import CropStatistics, compose_input, crop_center, random_crop, synchronized_random_crop
from ..Autograd import Tape
from ..Contrastive import ContrastiveConfig, EmbeddingBatch, nt_xent_loss
from ..Exceptions import InvalidConfigError, InvalidOperationError, NumericalError
from ..Metrics import confusion, prf1
from ..Models import ModelParams, classifier_forward, encoder_forward, projector_forward
from ..Datasets.Dataset import Dataset
from ..Datasets.Folds import Splits
from .Adam import AdamState, adam_step
from .RunRecord import RunRecord

logger = logging.getLogger(__name__)

# Stream tags keep the per-purpose random streams of one seed apart.
CROP_STREAM = 0
DROPOUT_STREAM = 1
SHUFFLE_STREAM = 2

EVAL_BATCH = 64


def _stream(seed, tag, *keys):
    return np.random.default_rng([seed, tag] + [int(key) for key in keys])


def _check_isolation(ids, holdout_ids, what):
    if holdout_ids:
        leaked = set(ids) & set(holdout_ids)
        if leaked:
            raise InvalidOperationError("{} held-out ids appear in the {} set, e.g. {}".format(
                len(leaked), what, sorted(leaked)[0]))


def _check_mode(config, *modes):
    if config.mode not in modes:
        raise InvalidConfigError("a {} config cannot drive this loop".format(config.mode))


def _snapshot(params, config):
    snapshot = params.snapshot()
    snapshot["train"] = config.to_dict()
    return snapshot


def pretrain(dataset, pool_ids, params, config, stats=None, holdout_ids=None):
    """Pretrains the encoder and projection head with the contrastive objective.

    Every epoch the pool is shuffled with a stream derived from ``(seed, epoch)`` and cut into
    batches of ``batch_size`` samples; the trailing partial batch is dropped. Each sample yields a
    synchronized random crop of its reflectance and depth planes (stream ``(seed, epoch, index)``).
    The ``2N`` views pass through the encoder and the projector in one batch, reflectance views
    first, and the loss is minimized with Adam.

    Parameters:
        dataset (depthcontrast.Datasets.Dataset.Dataset): The samples.
        pool_ids (list): The unlabeled pretraining ids.
        params (depthcontrast.Models.Params.ModelParams): The initial parameters; not modified.
        config (depthcontrast.Config.TrainConfig): A ``pretrain`` config.
        stats (depthcontrast.Augment.NormalizationStats, optional): The standardization
            statistics; computed over the pool when omitted.
        holdout_ids (list, optional): Ids that must never enter a batch (the test fold).

    Returns:
        tuple: The pretrained :class:`depthcontrast.Models.Params.ModelParams` and the
        :class:`depthcontrast.Training.RunRecord.RunRecord`. A run that meets a non-finite value
        stops and is returned with ``aborted`` set.

    Raises:
        AssertionError: If the input parameters are invalid.
        :class:`depthcontrast.Exceptions.InvalidConfigError`: If the config is not a pretrain
            config or the pool holds fewer samples than one batch.
        :class:`depthcontrast.Exceptions.InvalidOperationError`: If a held-out id is in the pool.

    Example:
        This example pretrains for two epochs on the training folds of a loaded dataset::

            from depthcontrast.Config import load_config
            from depthcontrast.Models import init_params
            from depthcontrast.Training import pretrain

            config = load_config("desk", {"pretrain.epochs": 2})
            params = init_params(config.encoder_config(), config.projector_config(),
                config.classifier_config(), seed=0)
            params, record = pretrain(dataset, splits.pretrain_ids, params,
                config.train_config("pretrain"), holdout_ids=splits.test_ids)
            print(record.losses)
    """
    assert isinstance(dataset, Dataset), "`dataset` is required as a Dataset."
    assert isinstance(params, ModelParams), "`params` is required as a ModelParams."
    _check_mode(config, "pretrain")
    pool_ids = list(pool_ids)
    if not pool_ids:
        raise InvalidConfigError("the pretraining pool is empty")
    if len(pool_ids) < config.batch_size:
        raise InvalidConfigError("the pool holds {} samples, fewer than one batch of {}".format(
            len(pool_ids), config.batch_size))
    _check_isolation(pool_ids, holdout_ids, "pretraining")
    params.encoder_config.check_input_size(config.crop_size)

    stats = stats if stats is not None else dataset.standardization_stats(pool_ids)
    samples = dataset.normalized(pool_ids, stats)
    params = params.copy()
    state = AdamState()
    record = RunRecord("pretrain", config.seed, _snapshot(params, config))
    record.trainable_parameters = params.parameter_count("encoder") + params.parameter_count("projector")
    crops = CropStatistics()
    contrastive = ContrastiveConfig(config.tau)
    size = (config.crop_size, config.crop_size)
    channels = params.encoder_config.input_channels
    batches = len(samples) // config.batch_size

    for epoch in range(config.epochs):
        order = _stream(config.seed, SHUFFLE_STREAM, epoch).permutation(len(samples))
        losses = []
        for batch in range(batches):
            batch_id = epoch * batches + batch
            indices = order[batch * config.batch_size:(batch + 1) * config.batch_size]
            pairs = [synchronized_random_crop(samples[index], size, _stream(config.seed, CROP_STREAM, epoch, index),
                channels=channels, statistics=crops) for index in indices]
            images = np.stack([pair.view_ref for pair in pairs] + [pair.view_dep for pair in pairs])
            try:
                tape = Tape(dtype=config.dtype)
                h = encoder_forward(params, images, tape, training=True)
                z = projector_forward(params, h, tape, training=True)
                loss, _ = nt_xent_loss(EmbeddingBatch(z, len(pairs), tape), contrastive)
                tape.backward(loss)
                adam_step(params.tensors, tape.param_grads(), state, config.learning_rate)
            except NumericalError as error:
                logger.error("pretraining aborted at batch %d: %s", batch_id, error.message)
                record.abort(error.message, batch_id)
                record.padded_crops = crops.padded
                return params, record
            losses.append(loss.item())
        record.losses.append(float(np.mean(losses)))
        logger.info("pretrain epoch %d/%d: loss %.6f", epoch + 1, config.epochs, record.losses[-1])

    record.padded_crops = crops.padded
    return params, record


def _inputs(samples, mode, channels):
    return np.stack([compose_input(sample, mode, channels) for sample in samples])


def _logits(params, images, dtype):
    outputs = []
    for start in range(0, len(images), EVAL_BATCH):
        tape = Tape(enabled=False, dtype=dtype)
        h = encoder_forward(params, images[start:start + EVAL_BATCH], tape, training=False)
        outputs.append(classifier_forward(params, h, tape, training=False).numpy())
    return np.concatenate(outputs)


def evaluate(params, images, labels, dtype=np.float64):
    """Scores the classifier on composed inputs.

    Parameters:
        params (depthcontrast.Models.Params.ModelParams): The parameters.
        images (numpy.ndarray): The ``N x C x H x W`` inputs.
        labels (list): The true class indices.
        dtype (numpy.dtype, optional): The compute width.

    Returns:
        :class:`depthcontrast.Metrics.MetricsReport`: The report.
    """
    predictions = np.argmax(_logits(params, images, dtype), axis=1)
    return prf1(confusion(predictions, labels, params.classifier_config.num_classes))


def _cross_entropy(tape, logits, labels, num_classes):
    onehot = np.zeros((len(labels), num_classes))
    onehot[np.arange(len(labels)), labels] = 1.0
    picked = tape.apply("mul", tape.apply("log_softmax", logits), tape.constant(onehot))
    return tape.apply("reduce_mean", tape.apply("scale", tape.apply("reduce_sum", picked, axis=1), factor=-1.0))


def _downstream(dataset, params, splits, config, stats, freeze_encoder):
    assert isinstance(dataset, Dataset), "`dataset` is required as a Dataset."
    assert isinstance(params, ModelParams), "`params` is required as a ModelParams."
    assert isinstance(splits, Splits), "`splits` is required as a Splits."
    if not splits.train_ids or not splits.val_ids:
        raise InvalidConfigError("downstream training needs non-empty train and validation splits")
    _check_isolation(splits.train_ids, splits.test_ids, "train")
    _check_isolation(splits.val_ids, splits.test_ids, "validation")
    params.encoder_config.check_input_size(config.crop_size)
    if params.classifier_config.dropout_rate != config.dropout_rate:
        raise InvalidConfigError("the classifier dropout {} differs from the run dropout {}".format(
            params.classifier_config.dropout_rate, config.dropout_rate))

    stats = stats if stats is not None else dataset.standardization_stats(splits.pretrain_ids or splits.train_ids)
    channels = params.encoder_config.input_channels
    size = (config.crop_size, config.crop_size)
    crops = CropStatistics()
    train = dataset.normalized(splits.train_ids, stats)
    train_labels = np.array(dataset.labels(splits.train_ids))
    val_labels = dataset.labels(splits.val_ids)
    val_images = _inputs([crop_center(s, size, crops) for s in dataset.normalized(splits.val_ids, stats)],
        config.input_mode, channels)

    initial = params
    params = params.copy()
    state = AdamState()
    record = RunRecord(config.mode, config.seed, _snapshot(params, config))
    record.trainable_parameters = params.parameter_count("classifier") + (
        0 if freeze_encoder else params.parameter_count("encoder"))
    num_classes = params.classifier_config.num_classes
    batches = -(-len(train) // config.batch_size)
    best = None
    best_metric = -1.0

    for epoch in range(config.epochs):
        order = _stream(config.seed, SHUFFLE_STREAM, epoch).permutation(len(train))
        losses = []
        for batch in range(batches):
            batch_id = epoch * batches + batch
            indices = order[batch * config.batch_size:(batch + 1) * config.batch_size]
            cropped = [random_crop(train[index], size, _stream(config.seed, CROP_STREAM, epoch, index), crops)[0]
                for index in indices]
            images = _inputs(cropped, config.input_mode, channels)
            try:
                tape = Tape(dtype=config.dtype)
                if freeze_encoder:
                    features = encoder_forward(params, images, Tape(enabled=False, dtype=config.dtype),
                        training=False).values
                else:
                    features = encoder_forward(params, images, tape, training=True)
                logits = classifier_forward(params, features, tape, training=True,
                    stream=_stream(config.seed, DROPOUT_STREAM, epoch, batch))
                loss = _cross_entropy(tape, logits, train_labels[indices], num_classes)
                tape.backward(loss)
                adam_step(params.tensors, tape.param_grads(), state, config.learning_rate)
            except NumericalError as error:
                logger.error("%s aborted at batch %d: %s", config.mode, batch_id, error.message)
                record.abort(error.message, batch_id)
                break
            losses.append(loss.item())
        if record.aborted:
            break
        record.losses.append(float(np.mean(losses)))
        metric = evaluate(params, val_images, val_labels, config.dtype).macro_f1
        record.val_metrics.append(metric)
        logger.info("%s epoch %d/%d: loss %.6f, validation macro F1 %.4f", config.mode, epoch + 1,
            config.epochs, record.losses[-1], metric)
        if metric > best_metric:
            logger.debug("new best validation macro F1 %.4f at epoch %d", metric, epoch + 1)
            best_metric = metric
            best = params.copy()
            record.best_epoch = epoch + 1

    params = best if best is not None else params
    if freeze_encoder:
        record.encoder_frozen = params.equals(initial, "encoder")
        if not record.encoder_frozen:
            raise InvalidOperationError("linear evaluation changed the encoder parameters")

    train_images = _inputs([crop_center(s, size, crops) for s in train], config.input_mode, channels)
    record.train_report = evaluate(params, train_images, train_labels, config.dtype)
    if splits.test_ids:
        test_images = _inputs([crop_center(s, size, crops) for s in dataset.normalized(splits.test_ids, stats)],
            config.input_mode, channels)
        record.report = evaluate(params, test_images, dataset.labels(splits.test_ids), config.dtype)
    record.padded_crops = crops.padded
    return params, record


def finetune(dataset, params, splits, config, stats=None):
    """Trains the encoder and the classification head end to end with cross entropy.

    Training inputs are random crops, evaluation inputs center crops, both composed per
    ``config.input_mode`` (raw-reflectance-raw by default). The parameters of the epoch with the best
    validation macro F1 are kept (strictly better replaces). The projection head is not used.

    Parameters:
        dataset (depthcontrast.Datasets.Dataset.Dataset): The samples.
        params (depthcontrast.Models.Params.ModelParams): The initial parameters, pretrained or
            random; not modified.
        splits (depthcontrast.Datasets.Folds.Splits): The rotation.
        config (depthcontrast.Config.TrainConfig): A ``finetune`` config.
        stats (depthcontrast.Augment.NormalizationStats, optional): The standardization
            statistics; computed over the pretraining pool when omitted.

    Returns:
        tuple: The trained :class:`depthcontrast.Models.Params.ModelParams` and the
        :class:`depthcontrast.Training.RunRecord.RunRecord` with train and test reports.

    Raises:
        AssertionError: If the input parameters are invalid.
        :class:`depthcontrast.Exceptions.InvalidConfigError`: If a split is empty or the config
            does not fit.
        :class:`depthcontrast.Exceptions.InvalidOperationError`: If a test id is in the train or
            validation split.
    """
    _check_mode(config, "finetune")
    return _downstream(dataset, params, splits, config, stats, freeze_encoder=False)


def linear_eval(dataset, params, splits, config, stats=None):
    """Trains only the classification head on features of the frozen encoder.

    The encoder runs without recording, in evaluation mode, and its parameters are compared bit
    for bit with the initial ones after training (``RunRecord.encoder_frozen``). Otherwise this
    behaves like :func:`finetune`.

    Raises:
        :class:`depthcontrast.Exceptions.InvalidOperationError`: If the encoder changed.
    """
    _check_mode(config, "linear_eval")
    return _downstream(dataset, params, splits, config, stats, freeze_encoder=True)
