__all__ = [
    'PROTOCOLS',
    'FoldPlan',
    'SplitSpec',
    'Splits',
    'stratified_folds',
    'make_splits',
]

import logging
from collections import Counter, OrderedDict, namedtuple

import numpy as np
from sklearn.model_selection import StratifiedKFold, train_test_split

from ..Exceptions import InvalidConfigError, StratificationError
from .Manifest import CLASS_NAMES, DatasetManifest

logger = logging.getLogger(__name__)

# train, val, test percentages
PROTOCOLS = OrderedDict([
    ("fully_supervised", (60, 20, 20)),
    ("semi_supervised", (10, 10, 20)),
])

Splits = namedtuple("Splits", ["pretrain_ids", "train_ids", "val_ids", "test_ids"])


class FoldPlan(object):
    """

    The assignment of every sample of a manifest to one of ``k`` stratified folds.

    Attributes:
        k (int): The number of folds (readonly).
        seed (int): The seed of the assignment (readonly).
        assignments (collections.OrderedDict): Sample id to fold index, in manifest order
            (readonly).
        labels (collections.OrderedDict): Sample id to class index (readonly).

    """

    def __init__(self, assignments, labels, k, seed):
        self._assignments = OrderedDict(assignments)
        self._labels = OrderedDict(labels)
        self._k = k
        self._seed = seed

    def __repr__(self):
        return 'FoldPlan(k={!r}, seed={!r}, samples={})'.format(self._k, self._seed, len(self._assignments))

    @property
    def k(self):
        return self._k

    @property
    def seed(self):
        return self._seed

    @property
    def assignments(self):
        return OrderedDict(self._assignments)

    @property
    def labels(self):
        return OrderedDict(self._labels)

    def fold(self, index):
        """Returns the ids of one fold, in manifest order."""
        return [id for id, fold in self._assignments.items() if fold == index]

    def class_counts(self, index):
        """Returns the number of samples of every class in one fold.

        Returns:
            list: One count per class index.
        """
        counts = Counter(self._labels[id] for id in self.fold(index))
        return [counts.get(label, 0) for label in range(len(CLASS_NAMES))]


class SplitSpec(object):
    """

    One of the two split protocols: ``fully_supervised`` (train 60, val 20, test 20 percent) or
    ``semi_supervised`` (train 10, val 10, test 20 percent). Both pretrain on the 60 percent held by
    the training folds.

    Attributes:
        protocol (str): The protocol name (readonly).
        fractions (tuple): The train, val and test percentages (readonly).
        seed (int): The seed of the stratified subsampling of the semi-supervised protocol
            (readonly).

    """

    def __init__(self, protocol="fully_supervised", seed=0):
        if protocol not in PROTOCOLS:
            raise InvalidConfigError("unknown split protocol {!r}; expected one of {}".format(
                protocol, ", ".join(PROTOCOLS)))
        self._protocol = protocol
        self._seed = seed

    def __repr__(self):
        return 'SplitSpec({!r}, seed={!r})'.format(self._protocol, self._seed)

    @property
    def protocol(self):
        return self._protocol

    @property
    def fractions(self):
        return PROTOCOLS[self._protocol]

    @property
    def seed(self):
        return self._seed


def stratified_folds(manifest, k=5, seed=0):
    """Assigns every sample to one of ``k`` folds, keeping the class distribution of each fold within
    one sample of the proportional share.

    Parameters:
        manifest (depthcontrast.Datasets.Manifest.DatasetManifest): The dataset.
        k (int, optional): The number of folds.
        seed (int, optional): The shuffling seed.

    Returns:
        :class:`FoldPlan`: The assignment.

    Raises:
        AssertionError: If the input parameters are invalid.
        :class:`depthcontrast.Exceptions.StratificationError`: If a class holds fewer than ``k``
            samples; the error names the class.

    Example:
        This example prints the per-class counts of every fold::

            from depthcontrast.Datasets import stratified_folds

            plan = stratified_folds(manifest, k=5, seed=0)
            for index in range(plan.k):
                print(index, plan.class_counts(index))
    """
    assert isinstance(manifest, DatasetManifest), "`manifest` is required as a DatasetManifest."
    assert isinstance(k, int) and k >= 2, "`k` is required as an int of at least 2."
    for name, count in manifest.class_counts().items():
        if count < k:
            raise StratificationError("class holds {} samples, fewer than {} folds".format(count, k), name)

    ids = manifest.ids()
    labels = np.array(manifest.labels())
    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed)
    folds = np.empty(len(ids), dtype=np.int64)
    for index, (_, test) in enumerate(splitter.split(np.zeros(len(ids)), labels)):
        folds[test] = index
    return FoldPlan(zip(ids, folds.tolist()), zip(ids, labels.tolist()), k, seed)


def _subsample(ids, labels, size, seed, what):
    try:
        chosen, rest = train_test_split(ids, train_size=size, stratify=labels, random_state=seed)
    except ValueError as error:
        raise StratificationError("cannot draw a stratified {} subset: {}".format(what, error), None)
    return chosen, rest


def make_splits(plan, spec, test_fold):
    """Derives the pretraining pool and the train, validation and test ids of one rotation.

    The test set is fold ``test_fold`` and the validation fold is the next one (cyclically). The
    remaining three folds are the pretraining pool and, in the fully supervised protocol, the train
    set. The semi-supervised protocol subsamples the pool, stratified, into a train set and a
    validation set of 10 percent of the dataset each.

    Parameters:
        plan (FoldPlan): The folds.
        spec (SplitSpec): The protocol.
        test_fold (int): The held-out fold.

    Returns:
        :class:`Splits`: ``(pretrain_ids, train_ids, val_ids, test_ids)``, each in manifest order.

    Raises:
        AssertionError: If the input parameters are invalid.
        :class:`depthcontrast.Exceptions.InvalidConfigError`: If the fold index is out of range.
        :class:`depthcontrast.Exceptions.StratificationError`: If the pool is too small to
            subsample with stratification.
    """
    assert isinstance(plan, FoldPlan), "`plan` is required as a FoldPlan."
    assert isinstance(spec, SplitSpec), "`spec` is required as a SplitSpec."
    if isinstance(test_fold, bool) or not isinstance(test_fold, int) or not 0 <= test_fold < plan.k:
        raise InvalidConfigError("`test_fold` must lie in 0..{}, got {!r}".format(plan.k - 1, test_fold))

    val_fold = (test_fold + 1) % plan.k
    order = {id: index for index, id in enumerate(plan.assignments)}
    test_ids = plan.fold(test_fold)
    pool = [id for id, fold in plan.assignments.items() if fold not in (test_fold, val_fold)]

    if spec.protocol == "fully_supervised":
        return Splits(list(pool), list(pool), plan.fold(val_fold), test_ids)

    total = len(plan.assignments)
    train_size = int(round(total * spec.fractions[0] / 100.0))
    val_size = int(round(total * spec.fractions[1] / 100.0))
    labels = plan.labels
    train_ids, rest = _subsample(pool, [labels[id] for id in pool], train_size, spec.seed, "train")
    val_ids, _ = _subsample(rest, [labels[id] for id in rest], val_size, spec.seed + 1, "validation")
    train_ids = sorted(train_ids, key=order.get)
    val_ids = sorted(val_ids, key=order.get)
    logger.debug("semi-supervised rotation %d: %d train, %d val from a pool of %d", test_fold,
        len(train_ids), len(val_ids), len(pool))
    return Splits(list(pool), train_ids, val_ids, test_ids)
