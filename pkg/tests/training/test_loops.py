import pytest

import numpy as np

from depthcontrast.Datasets.Folds import Splits
from depthcontrast.Exceptions import InvalidConfigError, InvalidOperationError
from depthcontrast.Training import evaluate, finetune, linear_eval, pretrain

@pytest.fixture(scope="module")
def splits(app):
    plan = app.dc.datasets.folds(app.dataset, k=5, seed=0)
    return app.dc.datasets.splits(plan, "fully_supervised", test_fold=0)

def test_pretrain(app, splits, tiny_model):
    config = app.config.train_config("pretrain")
    params, record = pretrain(app.dataset, splits.pretrain_ids, tiny_model, config, holdout_ids=splits.test_ids)
    assert len(splits.pretrain_ids) == 42
    assert record.mode == "pretrain"
    assert not record.aborted
    assert len(record.losses) == 2
    assert record.finite
    assert all(loss > 0 for loss in record.losses)
    assert record.val_metrics == []
    assert record.trainable_parameters == tiny_model.parameter_count("encoder") + tiny_model.parameter_count("projector")
    assert record.config["train"]["mode"] == "pretrain"
    # pretraining updates the encoder and the projector, never the classifier
    assert not params.equals(tiny_model, "encoder")
    assert not params.equals(tiny_model, "projector")
    assert params.equals(tiny_model, "classifier")

def test_pretrain_leaves_input_untouched(app, splits, tiny_model):
    before = tiny_model.copy()
    pretrain(app.dataset, splits.pretrain_ids, tiny_model, app.config.train_config("pretrain"))
    assert tiny_model.equals(before)

def test_pretrain_is_reproducible(app, splits, tiny_model):
    config = app.config.train_config("pretrain")
    first, first_record = pretrain(app.dataset, splits.pretrain_ids, tiny_model, config)
    second, second_record = pretrain(app.dataset, splits.pretrain_ids, tiny_model, config)
    assert first_record.losses == second_record.losses
    assert first.equals(second)

def test_pretrain_seed_changes_run(app, splits, tiny_model):
    _, first = pretrain(app.dataset, splits.pretrain_ids, tiny_model, app.config.train_config("pretrain", seed=0))
    _, second = pretrain(app.dataset, splits.pretrain_ids, tiny_model, app.config.train_config("pretrain", seed=1))
    assert first.losses != second.losses

def test_pretrain_rejects_holdout_in_pool(app, splits, tiny_model):
    with pytest.raises(InvalidOperationError) as err_wrapper:
        pretrain(app.dataset, splits.pretrain_ids + splits.test_ids[:1], tiny_model,
            app.config.train_config("pretrain"), holdout_ids=splits.test_ids)
    assert splits.test_ids[0] in err_wrapper.value.message

def test_pretrain_pool_smaller_than_batch(app, splits, tiny_model):
    with pytest.raises(InvalidConfigError) as err_wrapper:
        pretrain(app.dataset, splits.pretrain_ids[:7], tiny_model, app.config.train_config("pretrain"))
    assert "fewer than one batch of 8" in err_wrapper.value.message

def test_pretrain_rejects_downstream_config(app, splits, tiny_model):
    with pytest.raises(InvalidConfigError):
        pretrain(app.dataset, splits.pretrain_ids, tiny_model, app.config.train_config("finetune"))

def test_pretrain_aborts_on_non_finite(app, splits, tiny_model):
    broken = tiny_model.copy()
    broken.tensors["encoder.stage0.bias"] = np.full(4, np.nan)
    params, record = pretrain(app.dataset, splits.pretrain_ids, broken, app.config.train_config("pretrain"))
    assert record.aborted
    assert record.abort_batch == 0
    assert record.losses == []
    assert record.summary()["abort_batch"] == 0

def test_finetune(app, splits, tiny_model):
    params, record = finetune(app.dataset, tiny_model, splits, app.config.train_config("finetune"))
    assert record.mode == "finetune"
    assert not record.aborted
    assert len(record.losses) == 2
    assert len(record.val_metrics) == 2
    assert record.best_epoch in (1, 2)
    assert record.val_metrics[record.best_epoch - 1] == max(record.val_metrics)
    assert record.encoder_frozen is None
    assert record.report.count == 14
    assert record.train_report.count == 42
    assert 0.0 <= record.report.macro_f1 <= 1.0
    assert record.trainable_parameters == tiny_model.parameter_count("classifier") + tiny_model.parameter_count("encoder")
    # the projection head is not used downstream
    assert params.equals(tiny_model, "projector")

def test_finetune_is_reproducible(app, splits, tiny_model):
    config = app.config.train_config("finetune")
    first, first_record = finetune(app.dataset, tiny_model, splits, config)
    second, second_record = finetune(app.dataset, tiny_model, splits, config)
    assert first_record.losses == second_record.losses
    assert first_record.val_metrics == second_record.val_metrics
    assert first.equals(second)

def test_linear_eval_freezes_encoder(app, splits, tiny_model):
    params, record = linear_eval(app.dataset, tiny_model, splits, app.config.train_config("linear_eval"))
    assert record.mode == "linear_eval"
    assert record.encoder_frozen is True
    assert params.equals(tiny_model, "encoder")
    assert not params.equals(tiny_model, "classifier")
    assert record.trainable_parameters == tiny_model.parameter_count("classifier")
    assert record.summary()["encoder_frozen"] is True

def test_downstream_rejects_test_leak(app, splits, tiny_model):
    leaky = Splits(splits.pretrain_ids, splits.train_ids + splits.test_ids[:2], splits.val_ids, splits.test_ids)
    with pytest.raises(InvalidOperationError):
        finetune(app.dataset, tiny_model, leaky, app.config.train_config("finetune"))

def test_downstream_rejects_empty_split(app, splits, tiny_model):
    empty = Splits(splits.pretrain_ids, splits.train_ids, [], splits.test_ids)
    with pytest.raises(InvalidConfigError):
        linear_eval(app.dataset, tiny_model, empty, app.config.train_config("linear_eval"))

def test_downstream_rejects_mode(app, splits, tiny_model):
    with pytest.raises(InvalidConfigError):
        linear_eval(app.dataset, tiny_model, splits, app.config.train_config("finetune"))

def test_evaluate(tiny_model):
    images = np.zeros((5, 3, 16, 16))
    report = evaluate(tiny_model, images, [0, 1, 2, 3, 4])
    assert report.count == 5
    # identical inputs get one prediction, so at most one class is recalled
    assert report.recall.sum() <= 1.0
