import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from data.dataset import Dataset
from data.generators import make_masked_glyph, make_toy_gauss
from nn.model import DenseLayer, MlpModel
from nn.training import OptimizerConfig, train


@pytest.fixture
def tiny_model():
    return MlpModel.from_dims([6, 8, 5, 3], seed=11)


@pytest.fixture
def linear_model():
    """f(x) = W x + b with two classes over four features"""
    weight = np.array([[0.5, -1.0, 2.0, 0.25],
                       [-0.3, 0.8, -0.6, 1.1]])
    return MlpModel([DenseLayer(weight, np.array([0.1, -0.2]), 'identity')])


@pytest.fixture
def separable_data():
    """Two classes split by the sign of the first feature, with a model that gets all of them right"""
    rng = np.random.default_rng(5)
    inputs = rng.uniform(-1, 1, size=(64, 3))
    inputs[:, 0] = np.where(np.arange(64) % 2 == 0, 1.0, -1.0) * rng.uniform(0.5, 1.0, 64)
    labels = (inputs[:, 0] < 0).astype(np.int64)
    model = MlpModel([DenseLayer(np.array([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]), np.zeros(2), 'identity')])
    return model, Dataset(inputs, labels, name='separable')


@pytest.fixture(scope='session')
def toy_setup():
    train_set, test_set = make_toy_gauss(seed=0)
    model = MlpModel.from_dims([2, 16, 16, 2], seed=0)
    report = train(model, train_set, OptimizerConfig(epochs=50, batch_size=32, learning_rate=0.01,
                                                     momentum=0.5, seed=0), test_data=test_set)
    return model, train_set, test_set, report


@pytest.fixture(scope='session')
def glyph_setup():
    """Trained glyph benchmark model; only used by tests marked slow"""
    train_set = make_masked_glyph(4096, seed=1)
    test_set = make_masked_glyph(512, seed=2)
    model = MlpModel.from_dims([train_set.dim, 128, 128, 32, 4], seed=0)
    train(model, train_set, OptimizerConfig(epochs=30, batch_size=64, learning_rate=0.05, momentum=0.9, seed=0))
    return model, train_set, test_set


@pytest.fixture
def in_tmp_dir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path
