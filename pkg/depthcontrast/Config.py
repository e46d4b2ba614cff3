__all__ = [
    'MODES',
    'PRESETS',
    'DATA_ENVIRONMENT_VARIABLE',
    'TrainConfig',
    'RunConfig',
    'load_config',
    'default_data_directory',
]

import copy
import json
import logging
import os

import numpy as np
import yaml

from .Augment import INPUT_MODES
from .Contrastive import ContrastiveConfig
from .Datasets.Synthetic import GeneratorConfig
from .Exceptions import InvalidConfigError, InvalidPathError
from .Models import ClassifierHeadConfig, EncoderConfig, ProjectionHeadConfig

logger = logging.getLogger(__name__)

MODES = ("pretrain", "finetune", "linear_eval")
DATA_ENVIRONMENT_VARIABLE = "DEPTHCONTRAST_DATA"

_DESK = {
    "seed": 0,
    "width": 8,
    "pretrain": {"learning_rate": 1e-3, "batch_size": 32, "epochs": 100, "crop_size": 32},
    "downstream": {"learning_rate": 5e-4, "batch_size": 16, "epochs": 50, "crop_size": 32,
        "input_mode": "raw_reflectance"},
    "contrastive": {"tau": 0.1},
    "encoder": {"input_channels": 3, "stages": [[16, 3, 2], [32, 3, 2], [64, 3, 2], [128, 3, 2]],
        "batch_norm": False},
    "projector": {"scale": 1.0 / 16, "hidden_sizes": None, "output_dim": None, "relu": True, "batch_norm": True},
    "classifier": {"hidden": 512, "dropout_rate": 0.3},
    "generator": {"scale": 0.24, "image_size": 64},
    "protocol": {"name": "FT-full", "folds": 5, "fold_seed": 0, "repetitions": 5, "max_workers": 1},
}

_FULL_SIZE = copy.deepcopy(_DESK)
_FULL_SIZE["pretrain"].update({"learning_rate": 5e-5, "batch_size": 256, "crop_size": 224})
_FULL_SIZE["downstream"].update({"learning_rate": 1e-5, "batch_size": 16, "crop_size": 224})
_FULL_SIZE["projector"].update({"scale": 1.0})
_FULL_SIZE["generator"].update({"scale": 1.0, "image_size": 256})

PRESETS = {
    "desk": _DESK,
    "paper-faithful": _FULL_SIZE,
}


class TrainConfig(object):
    """

    The settings of one training loop.

    Attributes:
        mode (str): ``pretrain``, ``finetune`` or ``linear_eval`` (readonly).
        learning_rate (float): The Adam step size (readonly).
        batch_size (int): The batch size; pretraining needs at least 2 (readonly).
        epochs (int): The number of epochs (readonly).
        crop_size (int): The square crop size (readonly).
        seed (int): The run seed (readonly).
        tau (float): The temperature; pretraining only (readonly).
        dropout_rate (float): The classifier dropout rate; downstream only (readonly).
        input_mode (str): The downstream input composition; downstream only (readonly).
        dtype (numpy.dtype): The compute width (readonly).

    """

    def __init__(self, mode, learning_rate, batch_size, epochs, crop_size, seed=0, tau=None, dropout_rate=None,
            input_mode="raw_reflectance", dtype=np.float64):
        """Initializes the TrainConfig class.

        Raises:
            :class:`depthcontrast.Exceptions.InvalidConfigError`: If an invariant is violated.
        """
        if mode not in MODES:
            raise InvalidConfigError("unknown mode {!r}; expected one of {}".format(mode, ", ".join(MODES)))
        if not isinstance(learning_rate, (int, float)) or isinstance(learning_rate, bool) or not learning_rate > 0:
            raise InvalidConfigError("`learning_rate` must be positive, got {!r}".format(learning_rate))
        minimum = 2 if mode == "pretrain" else 1
        if isinstance(batch_size, bool) or not isinstance(batch_size, int) or batch_size < minimum:
            raise InvalidConfigError("`batch_size` must be an integer of at least {} for {}, got {!r}".format(
                minimum, mode, batch_size))
        if isinstance(epochs, bool) or not isinstance(epochs, int) or epochs < 1:
            raise InvalidConfigError("`epochs` must be a positive integer, got {!r}".format(epochs))
        if isinstance(crop_size, bool) or not isinstance(crop_size, int) or crop_size < 1:
            raise InvalidConfigError("`crop_size` must be a positive integer, got {!r}".format(crop_size))
        if mode == "pretrain":
            if dropout_rate is not None:
                raise InvalidConfigError("`dropout_rate` only applies to downstream training")
            tau = ContrastiveConfig(0.1 if tau is None else tau).tau
        else:
            if tau is not None:
                raise InvalidConfigError("`tau` only applies to pretraining")
            dropout_rate = ClassifierHeadConfig(dropout_rate=0.3 if dropout_rate is None else dropout_rate).dropout_rate
            if input_mode not in INPUT_MODES:
                raise InvalidConfigError("unknown input mode {!r}; expected one of {}".format(
                    input_mode, ", ".join(INPUT_MODES)))
        self._mode = mode
        self._learning_rate = float(learning_rate)
        self._batch_size = batch_size
        self._epochs = epochs
        self._crop_size = crop_size
        self._seed = int(seed)
        self._tau = tau
        self._dropout_rate = dropout_rate
        self._input_mode = input_mode if mode != "pretrain" else None
        self._dtype = np.dtype(dtype)

    def __repr__(self):
        return 'TrainConfig({!r})'.format(self.to_dict())

    @property
    def mode(self):
        return self._mode

    @property
    def learning_rate(self):
        return self._learning_rate

    @property
    def batch_size(self):
        return self._batch_size

    @property
    def epochs(self):
        return self._epochs

    @property
    def crop_size(self):
        return self._crop_size

    @property
    def seed(self):
        return self._seed

    @property
    def tau(self):
        return self._tau

    @property
    def dropout_rate(self):
        return self._dropout_rate

    @property
    def input_mode(self):
        return self._input_mode

    @property
    def dtype(self):
        return self._dtype

    def to_dict(self):
        data = {
            "mode": self._mode,
            "learning_rate": self._learning_rate,
            "batch_size": self._batch_size,
            "epochs": self._epochs,
            "crop_size": self._crop_size,
            "seed": self._seed,
            "width": self._dtype.itemsize,
        }
        if self._mode == "pretrain":
            data["tau"] = self._tau
        else:
            data["dropout_rate"] = self._dropout_rate
            data["input_mode"] = self._input_mode
        return data


def _merge(base, update, lines, path=""):
    for key, value in update.items():
        where = path + key
        if key not in base:
            raise InvalidConfigError("unknown key `{}`".format(where), lines.get(where))
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise InvalidConfigError("`{}` must be a section".format(where), lines.get(where))
            _merge(base[key], value, lines, where + ".")
        else:
            base[key] = value


def _key_lines(node, path="", lines=None):
    lines = {} if lines is None else lines
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            name = path + str(key.value)
            lines[name] = key.start_mark.line + 1
            _key_lines(value, name + ".", lines)
    return lines


class RunConfig(object):
    """

    The resolved configuration of a run: a preset, updated by a YAML document, updated by
    command-line flags. Every section is validated when the object is created.

    Sections:
        ``pretrain`` and ``downstream`` (training loops), ``contrastive``, ``encoder``,
        ``projector``, ``classifier``, ``generator`` and ``protocol``; the top-level ``seed`` and
        ``width`` (8 for 64-bit, 4 for 32-bit arithmetic).

    Attributes:
        preset (str): The name of the preset the configuration started from (readonly).
        seed (int): The run seed (readonly).
        dtype (numpy.dtype): The compute width (readonly).

    """

    def __init__(self, data, preset="desk"):
        self._data = data
        self._preset = preset
        self._validate()

    def _validate(self):
        if self._data["width"] not in (4, 8):
            raise InvalidConfigError("`width` must be 4 or 8, got {!r}".format(self._data["width"]))
        if isinstance(self._data["seed"], bool) or not isinstance(self._data["seed"], int) or self._data["seed"] < 0:
            raise InvalidConfigError("`seed` must be a non-negative integer")
        self.encoder_config().check_input_size(self._data["pretrain"]["crop_size"])
        self.encoder_config().check_input_size(self._data["downstream"]["crop_size"])
        if self._data["downstream"]["input_mode"] == "raw_reflectance" and self.encoder_config().input_channels != 3:
            raise InvalidConfigError("`downstream.input_mode` raw_reflectance needs `encoder.input_channels` 3")
        self.projector_config()
        self.classifier_config()
        self.contrastive_config()
        self.generator_config()
        self.train_config("pretrain")
        self.train_config("finetune")
        protocol = self._data["protocol"]
        for key in ("folds", "repetitions", "max_workers"):
            value = protocol[key]
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise InvalidConfigError("`protocol.{}` must be a positive integer".format(key))

    def __repr__(self):
        return 'RunConfig(preset={!r})'.format(self._preset)

    @property
    def preset(self):
        return self._preset

    @property
    def seed(self):
        return self._data["seed"]

    @property
    def dtype(self):
        return np.dtype(np.float64 if self._data["width"] == 8 else np.float32)

    def section(self, name):
        return copy.deepcopy(self._data[name])

    def to_dict(self):
        data = copy.deepcopy(self._data)
        data["preset"] = self._preset
        return data

    def to_json(self):
        """Returns the resolved configuration as one line of JSON, as echoed into artifacts."""
        return json.dumps(self.to_dict(), sort_keys=True)

    def encoder_config(self):
        return EncoderConfig.from_dict(self._data["encoder"])

    def projector_config(self):
        return ProjectionHeadConfig(**self._data["projector"])

    def classifier_config(self):
        return ClassifierHeadConfig.from_dict(self._data["classifier"])

    def contrastive_config(self):
        return ContrastiveConfig(**self._data["contrastive"])

    def generator_config(self):
        return GeneratorConfig(**self._data["generator"])

    def train_config(self, mode, seed=None):
        """Builds the :class:`TrainConfig` of one mode.

        Parameters:
            mode (str): ``pretrain``, ``finetune`` or ``linear_eval``.
            seed (int, optional): Replaces the configured seed.

        Returns:
            :class:`TrainConfig`: The settings.
        """
        seed = self.seed if seed is None else seed
        if mode == "pretrain":
            section = self._data["pretrain"]
            return TrainConfig("pretrain", section["learning_rate"], section["batch_size"], section["epochs"],
                section["crop_size"], seed=seed, tau=self._data["contrastive"]["tau"], dtype=self.dtype)
        section = self._data["downstream"]
        return TrainConfig(mode, section["learning_rate"], section["batch_size"], section["epochs"],
            section["crop_size"], seed=seed, dropout_rate=self._data["classifier"]["dropout_rate"],
            input_mode=section["input_mode"], dtype=self.dtype)


def load_config(source=None, overrides=None):
    """Resolves a run configuration.

    Precedence is: ``overrides`` (command-line flags) over the document over the preset. A document
    may name its preset with a top-level ``preset`` key; ``desk`` is the default.

    Parameters:
        source (str, optional): A preset name or the path of a YAML document.
        overrides (dict, optional): Dotted keys (``pretrain.epochs``) mapped to values; ``None``
            values are ignored.

    Returns:
        :class:`RunConfig`: The resolved configuration.

    Raises:
        :class:`depthcontrast.Exceptions.InvalidConfigError`: If the document cannot be parsed,
            holds an unknown key or violates an invariant; the error carries the line when known.
        :class:`depthcontrast.Exceptions.InvalidPathError`: If the document cannot be read.

    Example:
        This example loads the full-size preset and shortens pretraining::

            from depthcontrast.Config import load_config

            config = load_config("paper-faithful", {"pretrain.epochs": 5})
            print(config.train_config("pretrain"))
    """
    document = {}
    lines = {}
    preset = "desk"
    if source is not None and source in PRESETS:
        preset = source
    elif source is not None:
        try:
            with open(source, "r", encoding="utf-8") as file:
                text = file.read()
        except OSError as error:
            raise InvalidPathError("cannot read config {}: {}".format(source, error.strerror))
        try:
            document = yaml.safe_load(text) or {}
            lines = _key_lines(yaml.compose(text))
        except yaml.YAMLError as error:
            mark = getattr(error, "problem_mark", None)
            raise InvalidConfigError("cannot parse config: {}".format(getattr(error, "problem", error)),
                mark.line + 1 if mark is not None else None)
        if not isinstance(document, dict):
            raise InvalidConfigError("a config document must be a mapping", 1)
        preset = document.pop("preset", preset)
        if preset not in PRESETS:
            raise InvalidConfigError("unknown preset {!r}; expected one of {}".format(preset, ", ".join(PRESETS)),
                lines.get("preset"))

    data = copy.deepcopy(PRESETS[preset])
    _merge(data, document, lines)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        section, _, name = key.rpartition(".")
        _merge(data, {section: {name: value}} if section else {name: value}, {})
    logger.debug("resolved config from preset %s", preset)
    return RunConfig(data, preset)


def default_data_directory():
    """Returns the data directory named by ``DEPTHCONTRAST_DATA``, or ``./data``."""
    return os.environ.get(DATA_ENVIRONMENT_VARIABLE, os.path.join(os.getcwd(), "data"))
