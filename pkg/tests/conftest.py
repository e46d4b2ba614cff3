import pytest
import tempfile
import shutil

import numpy as np

from depthcontrast import DepthContrast
from depthcontrast.Config import load_config
from depthcontrast.Datasets import CLASS_NAMES, GeneratorConfig

# Small enough for the whole suite to run in seconds.
TINY_OVERRIDES = {
    "encoder.stages": [[4, 3, 2], [8, 3, 2]],
    "projector.hidden_sizes": [8, 8],
    "projector.output_dim": 4,
    "classifier.hidden": 8,
    "pretrain.batch_size": 8,
    "pretrain.epochs": 2,
    "pretrain.crop_size": 16,
    "pretrain.learning_rate": 1e-3,
    "downstream.batch_size": 8,
    "downstream.epochs": 2,
    "downstream.crop_size": 16,
    "protocol.repetitions": 2,
}

# The desk preset with the epoch counts of the learning checks.
DESK_OVERRIDES = {
    "pretrain.epochs": 20,
    "downstream.epochs": 20,
}

def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run the slow training tests")

def pytest_configure(config):
    config.addinivalue_line("markers", "slow: a training test that takes minutes")

def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)

class TempDirectory(object):
    def __init__(self):
        self.path = tempfile.mkdtemp()

    def cleanup(self):
        shutil.rmtree(self.path)

@pytest.fixture
def temp_directory():
    temp = TempDirectory()
    yield temp
    temp.cleanup()

class App():
    def __init__(self):
        self.temp = TempDirectory()
        self.dc = DepthContrast(self.temp.path, MAX_WORKERS=2)
        self.config = load_config("desk", dict(TINY_OVERRIDES))
        counts = {name: 10 for name in CLASS_NAMES}
        self.manifest = self.dc.datasets.generate(GeneratorConfig(image_size=24, counts=counts), seed=3)
        self.dataset = self.dc.datasets.load()

    def cleanup(self):
        self.temp.cleanup()

@pytest.fixture(scope="module")
def app():
    application = App()
    yield application
    application.cleanup()

class DeskApp():
    def __init__(self):
        self.temp = TempDirectory()
        self.dc = DepthContrast(self.temp.path)
        self.config = load_config("desk", dict(DESK_OVERRIDES))
        self.manifest = self.dc.datasets.generate(self.config.generator_config(), seed=self.config.seed)
        self.dataset = self.dc.datasets.load()

    def cleanup(self):
        self.temp.cleanup()

@pytest.fixture(scope="module")
def desk_app():
    application = DeskApp()
    yield application
    application.cleanup()

@pytest.fixture
def tiny_overrides():
    return dict(TINY_OVERRIDES)

@pytest.fixture
def tiny_config(tiny_overrides):
    return load_config("desk", tiny_overrides)

@pytest.fixture
def tiny_model(tiny_config):
    return DepthContrast(tempfile.gettempdir()).models.create(tiny_config)

@pytest.fixture
def rng():
    return np.random.default_rng(1234)
