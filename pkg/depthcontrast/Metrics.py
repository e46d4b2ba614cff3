__all__ = [
    'ConfusionMatrix',
    'MetricsReport',
    'confusion',
    'prf1',
    'aggregate_folds',
]

import numpy as np
from sklearn.metrics import confusion_matrix

from .Datasets.Manifest import CLASS_NAMES
from .Exceptions import InvalidAttributeError, ShapeError

METRICS = ("precision", "recall", "f1")


class ConfusionMatrix(object):
    """

    Counts of true class (rows) against predicted class (columns).

    Attributes:
        counts (numpy.ndarray): The ``k x k`` integer counts (readonly).
        total (int): The number of evaluated samples (readonly).

    """

    def __init__(self, counts):
        counts = np.array(counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ShapeError("a confusion matrix must be square", [counts.shape])
        if np.any(counts < 0):
            raise InvalidAttributeError("confusion counts must be non-negative")
        counts.setflags(write=False)
        self._counts = counts

    def __repr__(self):
        return 'ConfusionMatrix({!r})'.format(self._counts.tolist())

    @property
    def counts(self):
        return self._counts

    @property
    def total(self):
        return int(self._counts.sum())

    @property
    def num_classes(self):
        return self._counts.shape[0]


class MetricsReport(object):
    """

    Per-class precision, recall and F1 with the macro F1, either for one evaluation or as the mean
    over several folds with their population standard deviation.

    Attributes:
        precision (numpy.ndarray): Per-class precision (readonly).
        recall (numpy.ndarray): Per-class recall (readonly).
        f1 (numpy.ndarray): Per-class F1 (readonly).
        macro_f1 (float): The unweighted mean of the per-class F1 (readonly).
        count (int): The number of evaluated samples (summed over folds) (readonly).
        std (dict): For aggregates, the standard deviations keyed by ``precision``, ``recall``,
            ``f1`` and ``macro_f1``; ``None`` otherwise (readonly).
        folds (list): For aggregates, the reports of the folds; ``None`` otherwise (readonly).
        class_names (tuple): The class names in index order (readonly).

    """

    def __init__(self, precision, recall, f1, macro_f1, count, std=None, folds=None, class_names=CLASS_NAMES):
        self._precision = np.asarray(precision, dtype=np.float64)
        self._recall = np.asarray(recall, dtype=np.float64)
        self._f1 = np.asarray(f1, dtype=np.float64)
        self._macro_f1 = float(macro_f1)
        self._count = int(count)
        self._std = std
        self._folds = folds
        self._class_names = tuple(class_names)

    def __repr__(self):
        if self._std is None:
            return 'MetricsReport(macro_f1={:.4f}, count={})'.format(self._macro_f1, self._count)
        return 'MetricsReport(macro_f1={:.4f} ± {:.4f}, folds={})'.format(
            self._macro_f1, self._std["macro_f1"], len(self._folds))

    @property
    def precision(self):
        return self._precision

    @property
    def recall(self):
        return self._recall

    @property
    def f1(self):
        return self._f1

    @property
    def macro_f1(self):
        return self._macro_f1

    @property
    def count(self):
        return self._count

    @property
    def std(self):
        return self._std

    @property
    def folds(self):
        return self._folds

    @property
    def class_names(self):
        return self._class_names

    def to_rows(self):
        """Returns the per-class table followed by a macro row.

        Single reports yield ``(class, precision, recall, f1)`` rows; aggregates add the standard
        deviation after every value.

        Returns:
            list: The rows.
        """
        rows = []
        for index, name in enumerate(self._class_names):
            values = [self._precision[index], self._recall[index], self._f1[index]]
            if self._std is None:
                rows.append([name] + values)
            else:
                spreads = [self._std[metric][index] for metric in METRICS]
                rows.append([name] + [item for pair in zip(values, spreads) for item in pair])
        if self._std is None:
            rows.append(["macro", "", "", self._macro_f1])
        else:
            rows.append(["macro", "", "", "", "", self._macro_f1, self._std["macro_f1"]])
        return rows

    def header(self):
        if self._std is None:
            return ["class", "precision", "recall", "f1"]
        return ["class", "precision_mean", "precision_std", "recall_mean", "recall_std", "f1_mean", "f1_std"]


def confusion(pred, truth, num_classes=len(CLASS_NAMES)):
    """Counts predictions per (true, predicted) class pair.

    Parameters:
        pred (list): The predicted class indices.
        truth (list): The true class indices.
        num_classes (int, optional): The number of classes.

    Returns:
        :class:`ConfusionMatrix`: The counts; entry ``(t, p)`` counts samples of class ``t``
        predicted as ``p``.

    Raises:
        :class:`depthcontrast.Exceptions.ShapeError`: If the lengths differ.
        :class:`depthcontrast.Exceptions.InvalidAttributeError`: If an index is out of range.
    """
    pred = np.asarray(pred, dtype=np.int64).reshape(-1)
    truth = np.asarray(truth, dtype=np.int64).reshape(-1)
    if pred.shape != truth.shape:
        raise ShapeError("predictions and truth differ in length", [pred.shape, truth.shape])
    for name, values in (("pred", pred), ("truth", truth)):
        if values.size and (values.min() < 0 or values.max() >= num_classes):
            raise InvalidAttributeError("`{}` holds a class index outside 0..{}".format(name, num_classes - 1))
    if not truth.size:
        return ConfusionMatrix(np.zeros((num_classes, num_classes), dtype=np.int64))
    return ConfusionMatrix(confusion_matrix(truth, pred, labels=np.arange(num_classes)))


def _ratio(numerator, denominator):
    numerator = numerator.astype(np.float64)
    denominator = denominator.astype(np.float64)
    return np.divide(numerator, denominator, out=np.zeros_like(numerator), where=denominator > 0)


def prf1(cm, class_names=CLASS_NAMES):
    """Computes per-class precision, recall and F1 and their macro F1.

    A 0/0 ratio is 0, so classes that are never predicted or never present count against the macro
    F1.

    Parameters:
        cm (ConfusionMatrix): The counts.
        class_names (tuple, optional): The class names in index order.

    Returns:
        :class:`MetricsReport`: The report.

    Example:
        This example scores three predictions::

            from depthcontrast.Metrics import confusion, prf1

            report = prf1(confusion([0, 1, 1], [0, 1, 2], num_classes=3), class_names=("a", "b", "c"))
            print(report.macro_f1)
    """
    assert isinstance(cm, ConfusionMatrix), "`cm` is required as a ConfusionMatrix."
    counts = cm.counts
    tp = np.diag(counts)
    fp = counts.sum(axis=0) - tp
    fn = counts.sum(axis=1) - tp
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    f1 = _ratio(2 * tp, 2 * tp + fp + fn)
    if len(class_names) != cm.num_classes:
        class_names = tuple(str(index) for index in range(cm.num_classes))
    return MetricsReport(precision, recall, f1, float(f1.mean()), cm.total, class_names=class_names)


def aggregate_folds(reports):
    """Averages reports over folds with population standard deviations.

    Parameters:
        reports (list): The :class:`MetricsReport` objects, one per fold or repetition.

    Returns:
        :class:`MetricsReport`: The mean report, with ``std`` and ``folds`` set.

    Raises:
        :class:`depthcontrast.Exceptions.InvalidAttributeError`: If the list is empty or the class
            sets differ.
    """
    reports = list(reports)
    if not reports:
        raise InvalidAttributeError("cannot aggregate an empty list of reports")
    names = reports[0].class_names
    if any(report.class_names != names for report in reports):
        raise InvalidAttributeError("reports cover different classes")
    stacked = {metric: np.stack([getattr(report, metric) for report in reports]) for metric in METRICS}
    macro = np.array([report.macro_f1 for report in reports])
    std = {metric: values.std(axis=0) for metric, values in stacked.items()}
    std["macro_f1"] = float(macro.std())
    return MetricsReport(stacked["precision"].mean(axis=0), stacked["recall"].mean(axis=0),
        stacked["f1"].mean(axis=0), float(macro.mean()), sum(report.count for report in reports),
        std=std, folds=reports, class_names=names)
