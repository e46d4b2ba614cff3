import pytest
import json
import os

from depthcontrast.Exceptions import InvalidPathError
from depthcontrast.Metrics import aggregate_folds, confusion, prf1
from depthcontrast.Storage import Storage
from depthcontrast.Training import RunRecord

def _lines(path):
    with open(path) as file:
        return file.read().splitlines()

def test_bytes(temp_directory):
    storage = Storage(temp_directory.path)
    storage.write_bytes(os.path.join("nested", "blob.bin"), b"\x00\x01")
    assert os.path.isfile(os.path.join(temp_directory.path, "nested", "blob.bin"))
    assert storage.read_bytes(os.path.join("nested", "blob.bin")) == b"\x00\x01"

def test_absolute_paths(temp_directory):
    storage = Storage("/nonexistent-root")
    path = os.path.join(temp_directory.path, "absolute.bin")
    storage.write_bytes(path, b"x")
    assert storage.resolve(path) == path
    assert storage.read_bytes(path) == b"x"

def test_missing_file(temp_directory):
    storage = Storage(temp_directory.path)
    with pytest.raises(InvalidPathError) as err_wrapper:
        storage.read_bytes("missing.bin")
    assert "missing.bin" in err_wrapper.value.message

def test_table(temp_directory):
    storage = Storage(temp_directory.path)
    storage.write_table("table.csv", ["name", "value"], [["a", 1], ["b, c", 2.5]], provenance='{"seed": 0}',
        footer={"rows": 2})
    assert _lines(os.path.join(temp_directory.path, "table.csv")) == [
        '# config: {"seed": 0}',
        "name,value",
        "a,1",
        '"b, c",2.5',
        '# summary: {"rows": 2}',
    ]

def test_table_without_provenance(temp_directory):
    storage = Storage(temp_directory.path)
    storage.write_table("plain.csv", ["x"], [[1]])
    assert _lines(os.path.join(temp_directory.path, "plain.csv")) == ["x", "1"]

def test_report(temp_directory):
    storage = Storage(temp_directory.path)
    report = prf1(confusion([0, 0], [0, 1], num_classes=2), class_names=("a", "b"))
    storage.write_report("report.csv", report)
    lines = _lines(os.path.join(temp_directory.path, "report.csv"))
    assert lines[0] == "class,precision,recall,f1"
    assert lines[1].startswith("a,0.5,1.0,0.666")
    assert lines[2] == "b,0.0,0.0,0.0"
    assert lines[3].startswith("macro,,,0.333")

def test_aggregate(temp_directory):
    storage = Storage(temp_directory.path)
    reports = [
        prf1(confusion([0, 1], [0, 1], num_classes=2), class_names=("a", "b")),
        prf1(confusion([0, 0], [0, 1], num_classes=2), class_names=("a", "b")),
    ]
    storage.write_aggregate("aggregate.csv", aggregate_folds(reports), provenance="{}")
    lines = _lines(os.path.join(temp_directory.path, "aggregate.csv"))
    assert lines[0] == "# config: {}"
    assert lines[1].split(",")[:3] == ["class", "precision_mean", "precision_std"]
    assert len(lines) == 6
    assert json.loads(lines[-1][len("# summary: "):]) == {"folds": 2, "std": "population"}

def test_aggregate_requires_std(temp_directory):
    storage = Storage(temp_directory.path)
    with pytest.raises(AssertionError):
        storage.write_aggregate("aggregate.csv", prf1(confusion([0], [0], num_classes=2), class_names=("a", "b")))

def test_run_record(temp_directory):
    storage = Storage(temp_directory.path)
    record = RunRecord("finetune", 4, {})
    record.losses.extend([1.5, 0.5])
    record.val_metrics.extend([0.25, 0.75])
    record.best_epoch = 2
    record.trainable_parameters = 10
    storage.write_run_record("record.csv", record)
    lines = _lines(os.path.join(temp_directory.path, "record.csv"))
    assert lines[:3] == ["epoch,loss,val_macro_f1", "1,1.5,0.25", "2,0.5,0.75"]
    summary = json.loads(lines[3][len("# summary: "):])
    assert summary == {"mode": "finetune", "seed": 4, "epochs": 2, "aborted": False, "trainable_parameters": 10,
        "padded_crops": 0, "best_epoch": 2}

def test_aborted_run_record(temp_directory):
    record = RunRecord("pretrain", 0, {})
    record.losses.append(float("nan"))
    record.abort("loss is not finite", 7)
    assert not record.finite
    summary = record.summary()
    assert summary["aborted"] is True
    assert summary["abort_reason"] == "loss is not finite"
    assert summary["abort_batch"] == 7
