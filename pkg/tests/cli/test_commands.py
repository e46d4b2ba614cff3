import pytest
import json
import logging
import os
import sys

from depthcontrast.Commands import EXIT_ACCEPTANCE, EXIT_CONFIG, EXIT_INTERNAL, EXIT_IO, EXIT_OK, build_parser, main
from depthcontrast.Exceptions import TapeError
from depthcontrast.Models import decode_checkpoint
from depthcontrast.Training import RunRecord

TINY_YAML = """\
encoder:
  stages: [[4, 3, 2], [8, 3, 2]]
projector:
  hidden_sizes: [8, 8]
  output_dim: 4
classifier:
  hidden: 8
pretrain:
  batch_size: 8
  epochs: 1
  crop_size: 16
downstream:
  batch_size: 8
  epochs: 1
  crop_size: 16
protocol:
  repetitions: 1
"""

@pytest.fixture(autouse=True)
def restore_logging():
    root = logging.getLogger()
    handlers = list(root.handlers)
    level = root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)

@pytest.fixture
def tiny_yaml(temp_directory):
    path = os.path.join(temp_directory.path, "tiny.yaml")
    with open(path, "w") as file:
        file.write(TINY_YAML)
    return path

def test_parser():
    args = build_parser().parse_args(["pretrain", "--out", "model.dckp", "--seed", "3", "--data", "somewhere"])
    assert args.command == "pretrain"
    assert args.seed == 3
    assert args.test_fold == 0
    assert args.config is None
    with pytest.raises(SystemExit):
        build_parser().parse_args(["finetune", "--out", "dir"])

def test_gen_data(temp_directory, capsys):
    out = os.path.join(temp_directory.path, "data")
    assert main(["gen-data", "--out", out, "--scale", "0.05", "--image-size", "16", "--seed", "2"]) == EXIT_OK
    assert os.path.isfile(os.path.join(out, "manifest.csv"))
    with open(os.path.join(out, "generator.json")) as file:
        generator = json.load(file)
    assert generator["seed"] == 2
    assert generator["generator"] == {"scale": 0.05, "image_size": 16}
    printed = capsys.readouterr().out
    assert "Cylindrical" in printed
    assert "Ore1" in printed

def test_bad_config(temp_directory, app):
    path = os.path.join(temp_directory.path, "bad.yaml")
    with open(path, "w") as file:
        file.write("pretrain:\n  epochz: 3\n")
    code = main(["pretrain", "--config", path, "--data", app.temp.path,
        "--out", os.path.join(temp_directory.path, "model.dckp")])
    assert code == EXIT_CONFIG

def test_missing_config(temp_directory, app):
    code = main(["pretrain", "--config", os.path.join(temp_directory.path, "missing.yaml"), "--data", app.temp.path,
        "--out", os.path.join(temp_directory.path, "model.dckp")])
    assert code == EXIT_IO

def test_missing_data(temp_directory, tiny_yaml):
    code = main(["pretrain", "--config", tiny_yaml, "--data", os.path.join(temp_directory.path, "nothing"),
        "--out", os.path.join(temp_directory.path, "model.dckp")])
    assert code == EXIT_IO

def test_bad_test_fold(temp_directory, tiny_yaml, app):
    code = main(["pretrain", "--config", tiny_yaml, "--data", app.temp.path, "--test-fold", "5",
        "--out", os.path.join(temp_directory.path, "model.dckp")])
    assert code == EXIT_CONFIG

def test_pretrain_then_finetune(temp_directory, tiny_yaml, app, capsys):
    checkpoint = os.path.join(temp_directory.path, "model.dckp")
    assert main(["pretrain", "--config", tiny_yaml, "--data", app.temp.path, "--out", checkpoint]) == EXIT_OK
    assert os.path.isfile(checkpoint)
    assert os.path.isfile(os.path.join(temp_directory.path, "model-record.csv"))

    out = os.path.join(temp_directory.path, "finetune")
    assert main(["finetune", "--config", tiny_yaml, "--data", app.temp.path, "--init", checkpoint,
        "--out", out]) == EXIT_OK
    for name in ("finetune.dckp", "finetune-record.csv", "finetune-train.csv", "finetune-test.csv"):
        assert os.path.isfile(os.path.join(out, name))
    printed = capsys.readouterr().out
    assert "test (14 samples)" in printed
    assert "freeze check" not in printed

def test_linear_eval_semi(temp_directory, tiny_yaml, app, capsys):
    out = os.path.join(temp_directory.path, "linear")
    assert main(["linear-eval", "--config", tiny_yaml, "--data", app.temp.path, "--init", "random", "--semi",
        "--input-mode", "raw", "--out", out]) == EXIT_OK
    assert os.path.isfile(os.path.join(out, "linear-eval.dckp"))
    printed = capsys.readouterr().out
    assert "train (7 samples)" in printed
    assert "encoder freeze check: passed" in printed

def test_checkpoint_mismatch(temp_directory, tiny_yaml, app):
    checkpoint = os.path.join(temp_directory.path, "model.dckp")
    assert main(["pretrain", "--config", tiny_yaml, "--data", app.temp.path, "--out", checkpoint]) == EXIT_OK
    code = main(["finetune", "--data", app.temp.path, "--init", checkpoint,
        "--out", os.path.join(temp_directory.path, "finetune")])
    assert code == EXIT_CONFIG

def test_unknown_protocol(tiny_yaml, app):
    assert main(["protocol", "--config", tiny_yaml, "--data", app.temp.path, "--name", "FT-half"]) == EXIT_CONFIG

def test_protocol(temp_directory, tiny_yaml, app, capsys):
    out = os.path.join(temp_directory.path, "protocol")
    assert main(["protocol", "--config", tiny_yaml, "--data", app.temp.path, "--name", "FT-semi",
        "--out", out]) == EXIT_OK
    assert os.path.isfile(os.path.join(out, "comparison.csv"))
    printed = capsys.readouterr().out
    assert "FT-semi/pretrained" in printed
    assert "FT-semi/random-init" in printed

def test_gradcheck(capsys):
    assert main(["gradcheck"]) == EXIT_OK
    printed = capsys.readouterr().out
    assert "FAIL" not in printed

def test_gradcheck_injected_fault(capsys):
    assert main(["gradcheck", "--inject-fault"]) == EXIT_ACCEPTANCE
    assert "FAIL" in capsys.readouterr().out

def _tree_bytes(root):
    contents = {}
    for directory, _, names in os.walk(root):
        for name in names:
            path = os.path.join(directory, name)
            with open(path, "rb") as file:
                contents[os.path.relpath(path, root)] = file.read()
    return contents

def test_gen_data_is_reproducible(temp_directory):
    first = os.path.join(temp_directory.path, "first")
    second = os.path.join(temp_directory.path, "second")
    assert main(["gen-data", "--out", first, "--scale", "0.1", "--seed", "7"]) == EXIT_OK
    assert main(["gen-data", "--out", second, "--scale", "0.1", "--seed", "7"]) == EXIT_OK
    contents = _tree_bytes(first)
    assert "manifest.csv" in contents
    assert contents == _tree_bytes(second)

def test_gen_data_rejects_zero_scale(temp_directory):
    out = os.path.join(temp_directory.path, "data")
    assert main(["gen-data", "--out", out, "--scale", "0"]) == EXIT_CONFIG
    assert not os.path.isfile(os.path.join(out, "manifest.csv"))

def test_pretrain_is_reproducible(temp_directory, tiny_yaml, app):
    paths = [os.path.join(temp_directory.path, name) for name in ("a.dckp", "b.dckp")]
    for path in paths:
        assert main(["pretrain", "--config", tiny_yaml, "--data", app.temp.path, "--seed", "5",
            "--out", path]) == EXIT_OK
    checkpoints = []
    for path in paths:
        with open(path, "rb") as file:
            checkpoints.append(file.read())
    assert checkpoints[0] == checkpoints[1]
    with open(paths[0].replace(".dckp", "-record.csv"), "rb") as first, \
            open(paths[1].replace(".dckp", "-record.csv"), "rb") as second:
        assert first.read() == second.read()

    snapshot, _ = decode_checkpoint(checkpoints[0])
    assert snapshot["run_seed"] == 5
    assert snapshot["config"]["seed"] == 5
    assert snapshot["config"]["contrastive"]["tau"] == 0.1
    assert snapshot["config"]["pretrain"]["learning_rate"] == 1e-3
    assert snapshot["config"]["pretrain"]["epochs"] == 1

def test_finetune_checkpoint_records_config(temp_directory, tiny_yaml, app):
    out = os.path.join(temp_directory.path, "finetune")
    assert main(["finetune", "--config", tiny_yaml, "--data", app.temp.path, "--init", "random",
        "--input-mode", "raw", "--out", out]) == EXIT_OK
    with open(os.path.join(out, "finetune.dckp"), "rb") as file:
        snapshot, _ = decode_checkpoint(file.read())
    assert snapshot["config"]["downstream"]["input_mode"] == "raw"
    assert snapshot["config"]["downstream"]["learning_rate"] == 5e-4

def test_single_channel_encoder_with_composed_input(temp_directory, tiny_yaml, app):
    path = os.path.join(temp_directory.path, "single.yaml")
    with open(path, "w") as file:
        file.write(TINY_YAML.replace("encoder:\n", "encoder:\n  input_channels: 1\n"))
    out = os.path.join(temp_directory.path, "finetune")
    code = main(["finetune", "--config", path, "--data", app.temp.path, "--init", "random", "--out", out])
    assert code == EXIT_CONFIG
    assert not os.path.exists(os.path.join(out, "finetune.dckp"))
    assert main(["finetune", "--config", path, "--data", app.temp.path, "--init", "random", "--input-mode", "raw",
        "--out", out]) == EXIT_OK

def test_other_package_errors(monkeypatch):
    def broken_suite(eps, tol):
        raise TapeError("backward called twice on one tape")

    monkeypatch.setattr("depthcontrast.Commands.gradient_suite", broken_suite)
    assert main(["gradcheck"]) == EXIT_INTERNAL

def test_protocol_with_aborted_arm(temp_directory, tiny_yaml, app, monkeypatch, capsys):
    def aborting_pretrain(dataset, pool_ids, params, config, stats=None, holdout_ids=None):
        record = RunRecord("pretrain", config.seed, config.to_dict())
        record.abort("non-finite loss", 0)
        return params, record

    monkeypatch.setattr(sys.modules["depthcontrast.Training.Protocols"], "pretrain", aborting_pretrain)
    out = os.path.join(temp_directory.path, "protocol")
    assert main(["protocol", "--config", tiny_yaml, "--data", app.temp.path, "--name", "LE-semi",
        "--out", out]) == EXIT_ACCEPTANCE
    assert os.path.isfile(os.path.join(out, "comparison.csv"))
    assert os.path.isfile(os.path.join(out, "pretrained-0-pretrain-record.csv"))
    assert not os.path.exists(os.path.join(out, "pretrained-0-record.csv"))
    assert "LE-semi/random-init" in capsys.readouterr().out
