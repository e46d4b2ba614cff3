import pytest

import numpy as np

def test_loaded_samples(app):
    assert len(app.dataset) == 70
    sample = app.dataset.get("Cylindrical-00060")
    assert sample.label == 6
    assert sample.shape == (24, 24)
    assert "Ore2-00030" in app.dataset
    assert app.dataset.labels(["Mixed1-00000", "Mixed2-00010"]) == [0, 1]

def test_standardization_on_training_ids(app):
    plan = app.dc.datasets.folds(app.dataset, k=5, seed=0)
    splits = app.dc.datasets.splits(plan, test_fold=0)
    stats = app.dataset.standardization_stats(splits.train_ids)
    train = app.dataset.normalized(splits.train_ids, stats)
    depth = np.concatenate([sample.depth.ravel() for sample in train])
    assert depth.mean() == pytest.approx(0.0, abs=1e-9)
    assert depth.std() == pytest.approx(1.0)
    test = app.dataset.normalized(splits.test_ids, stats)
    assert all(sample.normalized for sample in test)
    assert len(set(splits.test_ids) & set(splits.train_ids)) == 0
