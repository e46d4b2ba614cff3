__all__ = [
    'PROTOCOL_NAMES',
    'ARMS',
    'RunResult',
    'ProtocolResult',
    'run_protocol',
    'Protocols',
]

import logging
import os
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor

from ..Datasets.Folds import PROTOCOLS, SplitSpec, make_splits, stratified_folds
from ..Exceptions import ProtocolLookupError
from ..Metrics import aggregate_folds
from ..Models import init_params
from .Loops import finetune, linear_eval, pretrain

logger = logging.getLogger(__name__)

# name: (downstream mode, split protocol)
PROTOCOL_NAMES = OrderedDict([
    ("FT-full", ("finetune", "fully_supervised")),
    ("FT-semi", ("finetune", "semi_supervised")),
    ("LE-full", ("linear_eval", "fully_supervised")),
    ("LE-semi", ("linear_eval", "semi_supervised")),
])

ARMS = ("pretrained", "random-init")


class RunResult(object):
    """

    One run of a protocol arm.

    Attributes:
        arm (str): ``pretrained`` or ``random-init`` (readonly).
        index (int): The fold rotation or repetition (readonly).
        test_fold (int): The held-out fold (readonly).
        sizes (tuple): The pool, train, val and test sizes (readonly).
        record (depthcontrast.Training.RunRecord.RunRecord): The downstream record, or ``None``
            when pretraining aborted (readonly).
        pretrain_record (depthcontrast.Training.RunRecord.RunRecord): The pretraining record of
            the pretrained arm, or ``None`` (readonly).

    """

    def __init__(self, arm, index, test_fold, sizes, record, pretrain_record=None):
        self._arm = arm
        self._index = index
        self._test_fold = test_fold
        self._sizes = sizes
        self._record = record
        self._pretrain_record = pretrain_record

    def __repr__(self):
        return 'RunResult({!r}, {!r}, aborted={!r})'.format(self._arm, self._index, self.aborted)

    @property
    def arm(self):
        return self._arm

    @property
    def index(self):
        return self._index

    @property
    def test_fold(self):
        return self._test_fold

    @property
    def sizes(self):
        return self._sizes

    @property
    def record(self):
        return self._record

    @property
    def pretrain_record(self):
        return self._pretrain_record

    @property
    def aborted(self):
        pretrain_aborted = self._pretrain_record is not None and self._pretrain_record.aborted
        return pretrain_aborted or self._record is None or self._record.aborted


class ProtocolResult(object):
    """

    The outcome of :func:`run_protocol`: every run of both arms and their aggregates.

    Attributes:
        name (str): The protocol name (readonly).
        mode (str): The downstream mode (readonly).
        split (str): The split protocol (readonly).
        input_mode (str): The downstream input composition (readonly).
        runs (list): The :class:`RunResult` objects in submission order (readonly).
        aggregates (collections.OrderedDict): Arm to aggregated
            :class:`depthcontrast.Metrics.MetricsReport`, for arms with at least one finished run
            (readonly).
        aborted (bool): Whether any run aborted (readonly).

    """

    def __init__(self, name, input_mode, runs):
        self._name = name
        self._mode, self._split = PROTOCOL_NAMES[name]
        self._input_mode = input_mode
        self._runs = list(runs)
        self._aggregates = OrderedDict()
        for arm in ARMS:
            reports = [run.record.report for run in self.arm_runs(arm) if not run.aborted]
            if reports:
                self._aggregates[arm] = aggregate_folds(reports)

    def __repr__(self):
        return 'ProtocolResult({!r}, runs={}, aborted={!r})'.format(self._name, len(self._runs), self.aborted)

    @property
    def name(self):
        return self._name

    @property
    def mode(self):
        return self._mode

    @property
    def split(self):
        return self._split

    @property
    def input_mode(self):
        return self._input_mode

    @property
    def runs(self):
        return list(self._runs)

    @property
    def aggregates(self):
        return OrderedDict(self._aggregates)

    @property
    def aborted(self):
        return any(run.aborted for run in self._runs)

    def arm_runs(self, arm):
        return [run for run in self._runs if run.arm == arm]

    def comparison_rows(self):
        """Returns the comparison table: one row per arm with the experiment id, the split
        fractions, the input mode, the mean and standard deviation of the macro F1 and the number of
        finished runs.
        """
        fractions = "/".join(str(value) for value in PROTOCOLS[self._split])
        rows = []
        for arm in ARMS:
            report = self._aggregates.get(arm)
            finished = len([run for run in self.arm_runs(arm) if not run.aborted])
            rows.append(["{}/{}".format(self._name, arm), arm, fractions, self._input_mode,
                report.macro_f1 if report else "", report.std["macro_f1"] if report else "", finished])
        return rows

    def ordering(self):
        """Describes how the pretrained arm compares with the random-init arm.

        Returns:
            str: A one-line statement, or ``None`` when an arm has no finished run.
        """
        if len(self._aggregates) < 2:
            return None
        pretrained = self._aggregates["pretrained"].macro_f1
        baseline = self._aggregates["random-init"].macro_f1
        relation = ">=" if pretrained >= baseline else "<"
        return "{}: pretrained macro F1 {:.4f} {} random-init {:.4f}".format(self._name, pretrained, relation, baseline)


def _run(dataset, plan, config, name, arm, index):
    mode, split = PROTOCOL_NAMES[name]
    seed = config.seed + index
    test_fold = index if split == "fully_supervised" else 0
    splits = make_splits(plan, SplitSpec(split, seed=seed), test_fold)
    sizes = (len(splits.pretrain_ids), len(splits.train_ids), len(splits.val_ids), len(splits.test_ids))
    stats = dataset.standardization_stats(splits.pretrain_ids)
    params = init_params(config.encoder_config(), config.projector_config(), config.classifier_config(), seed)

    pretrain_record = None
    if arm == "pretrained":
        params, pretrain_record = pretrain(dataset, splits.pretrain_ids, params,
            config.train_config("pretrain", seed=seed), stats=stats, holdout_ids=splits.test_ids)
        if pretrain_record.aborted:
            return RunResult(arm, index, test_fold, sizes, None, pretrain_record)

    loop = finetune if mode == "finetune" else linear_eval
    _, record = loop(dataset, params, splits, config.train_config(mode, seed=seed), stats=stats)
    logger.info("%s %s run %d: test macro F1 %s", name, arm, index,
        "{:.4f}".format(record.report.macro_f1) if record.report is not None else "n/a")
    return RunResult(arm, index, test_fold, sizes, record, pretrain_record)


def run_protocol(name, dataset, config, max_workers=1):
    """Runs both arms of one of the experiment protocols.

    ``FT-*`` protocols fine-tune, ``LE-*`` protocols evaluate linearly. ``*-full`` protocols
    rotate the test fold over all folds; ``*-semi`` protocols hold fold 0 out and repeat the run
    with ``protocol.repetitions`` seeds. Run ``i`` uses seed ``config.seed + i`` in both arms, so
    the arms only differ by pretraining. Runs are independent and may execute in parallel; results
    are collected in submission order.

    Parameters:
        name (str): ``FT-full``, ``FT-semi``, ``LE-full`` or ``LE-semi``.
        dataset (depthcontrast.Datasets.Dataset.Dataset): The samples.
        config (depthcontrast.Config.RunConfig): The resolved configuration.
        max_workers (int, optional): The number of concurrent runs.

    Returns:
        :class:`ProtocolResult`: The runs and their aggregates.

    Raises:
        :class:`depthcontrast.Exceptions.ProtocolLookupError`: If the name is unknown; the
            message lists the valid names.
    """
    if name not in PROTOCOL_NAMES:
        raise ProtocolLookupError("unknown protocol {!r}; expected one of {}".format(name, ", ".join(PROTOCOL_NAMES)))
    protocol = config.section("protocol")
    plan = stratified_folds(dataset.manifest, k=protocol["folds"], seed=protocol["fold_seed"])
    count = protocol["folds"] if PROTOCOL_NAMES[name][1] == "fully_supervised" else protocol["repetitions"]
    jobs = [(arm, index) for arm in ARMS for index in range(count)]

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        runs = list(executor.map(lambda job: _run(dataset, plan, config, name, *job), jobs))
    result = ProtocolResult(name, config.section("downstream")["input_mode"], runs)
    if result.aborted:
        logger.error("%s: %d runs aborted", name, len([run for run in runs if run.aborted]))
    return result


class Protocols(object):
    """

    This class should be used to run experiment protocols and write their tables. It's
    instantiated for you as an attribute of the :class:`depthcontrast.DepthContrast.DepthContrast`
    class.

    """

    def __init__(self, dc, storage):
        self._dc = dc
        self._storage = storage

    def run(self, name, dataset, config, out_dir=None):
        """Runs a protocol and, when ``out_dir`` is given, writes its tables.

        The directory receives ``comparison.csv`` (one row per arm), ``<arm>-aggregate.csv`` (the
        per-class mean and standard deviation), ``<arm>-<run>-test.csv`` and
        ``<arm>-<run>-train.csv`` per finished run, and ``<arm>-<run>-record.csv`` per run.

        Parameters:
            name (str): The protocol name.
            dataset (depthcontrast.Datasets.Dataset.Dataset): The samples.
            config (depthcontrast.Config.RunConfig): The resolved configuration.
            out_dir (str, optional): The output directory.

        Returns:
            :class:`ProtocolResult`: The result.

        Example:
            This example runs the semi-supervised fine-tuning comparison::

                from depthcontrast import DepthContrast
                from depthcontrast.Config import load_config

                dc = DepthContrast("./data")
                result = dc.protocols.run("FT-semi", dc.datasets.load(), load_config(), out_dir="./out")
                print(result.ordering())
        """
        max_workers = config.section("protocol")["max_workers"]
        result = run_protocol(name, dataset, config, max_workers=max_workers)
        if out_dir is None:
            return result
        provenance = config.to_json()
        self._storage.write_table(os.path.join(out_dir, "comparison.csv"),
            ["experiment", "arm", "split", "input_mode", "macro_f1_mean", "macro_f1_std", "runs"],
            result.comparison_rows(), provenance)
        for arm, report in result.aggregates.items():
            self._storage.write_aggregate(os.path.join(out_dir, "{}-aggregate.csv".format(arm)), report, provenance)
        for run in result.runs:
            stem = os.path.join(out_dir, "{}-{}".format(run.arm, run.index))
            if run.pretrain_record is not None:
                self._storage.write_run_record(stem + "-pretrain-record.csv", run.pretrain_record, provenance)
            if run.record is None:
                continue
            self._storage.write_run_record(stem + "-record.csv", run.record, provenance)
            if run.record.report is not None:
                self._storage.write_report(stem + "-test.csv", run.record.report, provenance)
            if run.record.train_report is not None:
                self._storage.write_report(stem + "-train.csv", run.record.train_report, provenance)
        return result
