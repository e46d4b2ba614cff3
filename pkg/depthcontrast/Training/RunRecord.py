__all__ = [
    'RunRecord',
]

import math


class RunRecord(object):
    """

    The history of one training run.

    Attributes:
        mode (str): ``pretrain``, ``finetune`` or ``linear_eval`` (readonly).
        seed (int): The run seed (readonly).
        config (dict): The configuration snapshot of the run (readonly).
        losses (list): The mean training loss of every epoch.
        val_metrics (list): The validation macro F1 of every epoch; empty for pretraining.
        report (depthcontrast.Metrics.MetricsReport): The test report of the selected model, or
            ``None``.
        train_report (depthcontrast.Metrics.MetricsReport): The train report of the selected
            model, or ``None``.
        best_epoch (int): The epoch (from 1) whose model was selected, or ``None``.
        trainable_parameters (int): The number of parameters that received updates.
        encoder_frozen (bool): For linear evaluation, whether the encoder is bitwise unchanged;
            ``None`` otherwise.
        padded_crops (int): The number of crops that needed zero-padding.
        aborted (bool): Whether the run stopped on a non-finite value.
        abort_reason (str): The message of the abort, or ``None``.
        abort_batch (int): The index of the offending batch, or ``None``.

    """

    def __init__(self, mode, seed, config):
        self._mode = mode
        self._seed = seed
        self._config = config
        self.losses = []
        self.val_metrics = []
        self.report = None
        self.train_report = None
        self.best_epoch = None
        self.trainable_parameters = 0
        self.encoder_frozen = None
        self.padded_crops = 0
        self.aborted = False
        self.abort_reason = None
        self.abort_batch = None

    def __repr__(self):
        return 'RunRecord({!r}, epochs={}, aborted={!r})'.format(self._mode, len(self.losses), self.aborted)

    @property
    def mode(self):
        return self._mode

    @property
    def seed(self):
        return self._seed

    @property
    def config(self):
        return self._config

    @property
    def finite(self):
        """bool: Whether every recorded loss and metric is finite."""
        return all(math.isfinite(value) for value in self.losses + self.val_metrics)

    def abort(self, reason, batch_id):
        self.aborted = True
        self.abort_reason = reason
        self.abort_batch = batch_id

    def epoch_rows(self):
        """Returns one ``(epoch, loss, val_macro_f1)`` row per epoch; the metric is empty when
        there is none.
        """
        rows = []
        for index, loss in enumerate(self.losses):
            metric = self.val_metrics[index] if index < len(self.val_metrics) else ""
            rows.append((index + 1, loss, metric))
        return rows

    def summary(self):
        """Returns the summary fields written after the epoch rows.

        Returns:
            dict: The summary.
        """
        summary = {
            "mode": self._mode,
            "seed": self._seed,
            "epochs": len(self.losses),
            "aborted": self.aborted,
            "trainable_parameters": self.trainable_parameters,
            "padded_crops": self.padded_crops,
        }
        if self.aborted:
            summary["abort_reason"] = self.abort_reason
            summary["abort_batch"] = self.abort_batch
        if self.best_epoch is not None:
            summary["best_epoch"] = self.best_epoch
        if self.encoder_frozen is not None:
            summary["encoder_frozen"] = self.encoder_frozen
        if self.report is not None:
            summary["test_macro_f1"] = self.report.macro_f1
        if self.train_report is not None:
            summary["train_macro_f1"] = self.train_report.macro_f1
        return summary
