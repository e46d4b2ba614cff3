__all__ = [
    'Trainer',
]

import logging

from .Loops import finetune, linear_eval, pretrain

logger = logging.getLogger(__name__)


class Trainer(object):
    """

    This class should be used to run single training loops with the settings of a run
    configuration. It's instantiated for you as an attribute of the
    :class:`depthcontrast.DepthContrast.DepthContrast` class.

    """

    def __init__(self, dc, storage):
        """Initializes the Trainer class.

        Parameters:
            dc (depthcontrast.DepthContrast.DepthContrast): The DepthContrast instance that is
                instantiating the object.
            storage (depthcontrast.Storage.Storage): The storage used for run records.
        """
        self._dc = dc
        self._storage = storage

    def pretrain(self, dataset, splits, params, config, record_path=None):
        """Pretrains on the pool of a rotation, keeping its test ids out of every batch.

        Parameters:
            dataset (depthcontrast.Datasets.Dataset.Dataset): The samples.
            splits (depthcontrast.Datasets.Folds.Splits): The rotation.
            params (depthcontrast.Models.Params.ModelParams): The initial parameters.
            config (depthcontrast.Config.RunConfig): The resolved configuration.
            record_path (str, optional): Where to write the run record.

        Returns:
            tuple: The parameters and the :class:`depthcontrast.Training.RunRecord.RunRecord`.
        """
        stats = dataset.standardization_stats(splits.pretrain_ids)
        params, record = pretrain(dataset, splits.pretrain_ids, params, config.train_config("pretrain"), stats=stats,
            holdout_ids=splits.test_ids)
        if record_path is not None:
            self._storage.write_run_record(record_path, record, config.to_json())
        return params, record

    def downstream(self, mode, dataset, splits, params, config, out_prefix=None):
        """Fine-tunes or linearly evaluates on a rotation.

        With ``out_prefix`` the run record and the train and test reports are written to
        ``<prefix>-record.csv``, ``<prefix>-train.csv`` and ``<prefix>-test.csv``.

        Parameters:
            mode (str): ``finetune`` or ``linear_eval``.
            dataset (depthcontrast.Datasets.Dataset.Dataset): The samples.
            splits (depthcontrast.Datasets.Folds.Splits): The rotation.
            params (depthcontrast.Models.Params.ModelParams): The initial parameters.
            config (depthcontrast.Config.RunConfig): The resolved configuration.
            out_prefix (str, optional): The output path prefix.

        Returns:
            tuple: The parameters and the :class:`depthcontrast.Training.RunRecord.RunRecord`.
        """
        assert mode in ("finetune", "linear_eval"), "`mode` must be finetune or linear_eval."
        loop = finetune if mode == "finetune" else linear_eval
        stats = dataset.standardization_stats(splits.pretrain_ids)
        params, record = loop(dataset, params, splits, config.train_config(mode), stats=stats)
        if out_prefix is not None:
            provenance = config.to_json()
            self._storage.write_run_record(out_prefix + "-record.csv", record, provenance)
            if record.train_report is not None:
                self._storage.write_report(out_prefix + "-train.csv", record.train_report, provenance)
            if record.report is not None:
                self._storage.write_report(out_prefix + "-test.csv", record.report, provenance)
        return params, record
