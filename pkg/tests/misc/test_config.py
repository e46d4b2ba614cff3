import pytest
import json
import os

import numpy as np

from depthcontrast.Config import DATA_ENVIRONMENT_VARIABLE, TrainConfig, default_data_directory, load_config
from depthcontrast.Exceptions import InvalidConfigError, InvalidPathError

def _write(temp_directory, text):
    path = os.path.join(temp_directory.path, "run.yaml")
    with open(path, "w") as file:
        file.write(text)
    return path

def test_desk_preset():
    config = load_config()
    assert config.preset == "desk"
    assert config.seed == 0
    assert config.dtype == np.float64
    pretrain = config.train_config("pretrain")
    assert (pretrain.batch_size, pretrain.epochs, pretrain.crop_size) == (32, 100, 32)
    assert pretrain.learning_rate == 1e-3
    assert pretrain.tau == 0.1
    assert pretrain.input_mode is None
    finetune = config.train_config("finetune")
    assert finetune.dropout_rate == 0.3
    assert finetune.input_mode == "raw_reflectance"
    assert finetune.tau is None
    assert config.section("protocol") == {"name": "FT-full", "folds": 5, "fold_seed": 0, "repetitions": 5,
        "max_workers": 1}

def test_full_size_preset():
    config = load_config("paper-faithful")
    pretrain = config.train_config("pretrain")
    assert (pretrain.batch_size, pretrain.crop_size, pretrain.learning_rate) == (256, 224, 5e-5)
    downstream = config.train_config("linear_eval")
    assert (downstream.batch_size, downstream.learning_rate) == (16, 1e-5)

def test_section_is_a_copy():
    config = load_config()
    config.section("pretrain")["epochs"] = 1
    assert config.train_config("pretrain").epochs == 100

def test_overrides():
    config = load_config("desk", {"pretrain.epochs": 3, "seed": 9, "downstream.input_mode": "raw", "width": None})
    assert config.train_config("pretrain").epochs == 3
    assert config.train_config("pretrain").seed == 9
    assert config.train_config("pretrain", seed=4).seed == 4
    assert config.train_config("finetune").input_mode == "raw"
    assert config.dtype == np.float64

def test_document_and_precedence(temp_directory):
    path = _write(temp_directory, "preset: desk\npretrain:\n  epochs: 3\n  batch_size: 4\nwidth: 4\n")
    config = load_config(path)
    assert config.train_config("pretrain").epochs == 3
    assert config.train_config("pretrain").batch_size == 4
    assert config.dtype == np.float32
    assert config.train_config("finetune").dtype == np.float32
    assert load_config(path, {"pretrain.epochs": 5}).train_config("pretrain").epochs == 5

def test_document_selects_preset(temp_directory):
    path = _write(temp_directory, "preset: paper-faithful\ndownstream:\n  epochs: 2\n")
    config = load_config(path)
    assert config.preset == "paper-faithful"
    assert config.train_config("finetune").epochs == 2
    assert config.train_config("finetune").crop_size == 224

def test_unknown_key_reports_line(temp_directory):
    path = _write(temp_directory, "preset: desk\npretrain:\n  epochs: 3\n  batch_size: 4\nencoder:\n  stagez: 1\n")
    with pytest.raises(InvalidConfigError) as err_wrapper:
        load_config(path)
    assert err_wrapper.value.message == "unknown key `encoder.stagez`"
    assert err_wrapper.value.line == 6

def test_unknown_override():
    with pytest.raises(InvalidConfigError) as err_wrapper:
        load_config("desk", {"pretrain.epochz": 1})
    assert err_wrapper.value.message == "unknown key `pretrain.epochz`"
    assert err_wrapper.value.line is None

def test_section_expected(temp_directory):
    with pytest.raises(InvalidConfigError) as err_wrapper:
        load_config(_write(temp_directory, "seed: 1\npretrain: 3\n"))
    assert err_wrapper.value.line == 2

def test_unknown_preset(temp_directory):
    with pytest.raises(InvalidConfigError) as err_wrapper:
        load_config(_write(temp_directory, "preset: huge\n"))
    assert "desk, paper-faithful" in err_wrapper.value.message
    assert err_wrapper.value.line == 1

def test_parse_error(temp_directory):
    with pytest.raises(InvalidConfigError) as err_wrapper:
        load_config(_write(temp_directory, "seed: 1\npretrain: [1, 2\n"))
    assert err_wrapper.value.message.startswith("cannot parse config")
    assert err_wrapper.value.line is not None

def test_not_a_mapping(temp_directory):
    with pytest.raises(InvalidConfigError) as err_wrapper:
        load_config(_write(temp_directory, "- 1\n- 2\n"))
    assert err_wrapper.value.line == 1

def test_missing_document(temp_directory):
    with pytest.raises(InvalidPathError):
        load_config(os.path.join(temp_directory.path, "missing.yaml"))

@pytest.mark.parametrize("overrides", [
    {"width": 2},
    {"seed": -1},
    {"seed": True},
    {"pretrain.batch_size": 1},
    {"pretrain.learning_rate": 0},
    {"downstream.epochs": 0},
    {"downstream.input_mode": "depth"},
    {"contrastive.tau": 0},
    {"classifier.dropout_rate": 1.0},
    {"protocol.folds": 0},
    {"pretrain.crop_size": 0},
])
def test_invalid_values(overrides):
    with pytest.raises(InvalidConfigError):
        load_config("desk", overrides)

def test_single_channel_input_modes():
    with pytest.raises(InvalidConfigError) as err_wrapper:
        load_config("desk", {"encoder.input_channels": 1})
    assert "input_channels" in str(err_wrapper.value)
    config = load_config("desk", {"encoder.input_channels": 1, "downstream.input_mode": "raw"})
    assert config.encoder_config().input_channels == 1
    assert config.train_config("finetune").input_mode == "raw"

def test_train_config_rules():
    with pytest.raises(InvalidConfigError):
        TrainConfig("pretrain", 1e-3, 8, 1, 16, dropout_rate=0.3)
    with pytest.raises(InvalidConfigError):
        TrainConfig("finetune", 1e-3, 8, 1, 16, tau=0.1)
    with pytest.raises(InvalidConfigError):
        TrainConfig("evaluate", 1e-3, 8, 1, 16)
    config = TrainConfig("finetune", 1e-3, 1, 1, 16)
    assert config.to_dict() == {"mode": "finetune", "learning_rate": 1e-3, "batch_size": 1, "epochs": 1,
        "crop_size": 16, "seed": 0, "width": 8, "dropout_rate": 0.3, "input_mode": "raw_reflectance"}

def test_to_json():
    config = load_config("desk", {"seed": 3})
    data = json.loads(config.to_json())
    assert data == config.to_dict()
    assert data["preset"] == "desk"
    assert data["seed"] == 3
    assert "\n" not in config.to_json()

def test_default_data_directory(monkeypatch, temp_directory):
    monkeypatch.setenv(DATA_ENVIRONMENT_VARIABLE, temp_directory.path)
    assert default_data_directory() == temp_directory.path
    monkeypatch.delenv(DATA_ENVIRONMENT_VARIABLE)
    assert default_data_directory() == os.path.join(os.getcwd(), "data")
