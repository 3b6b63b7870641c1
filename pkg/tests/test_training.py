import numpy as np
import pytest

from data.generators import make_toy_gauss
from nn.model import MlpModel, accuracy
from nn.training import OptimizerConfig, softmax_cross_entropy, train
from utils.errors import DivergenceError, ParameterError


def test_toy_model_separates_test_set(toy_setup):
    model, train_set, test_set, report = toy_setup
    assert accuracy(model, test_set) == 1.0
    assert report.final_test_accuracy == 1.0
    assert len(report.history) == 50
    assert report.history[-1].loss < report.history[0].loss


def test_training_is_deterministic():
    train_set, _ = make_toy_gauss(seed=3)
    opt = OptimizerConfig(epochs=3, batch_size=32, learning_rate=0.01, momentum=0.5, seed=7)
    a = MlpModel.from_dims([2, 8, 2], seed=1)
    b = MlpModel.from_dims([2, 8, 2], seed=1)
    train(a, train_set, opt)
    train(b, train_set, opt)
    assert a.equals(b)


def test_zero_epochs_leaves_initial_weights():
    train_set, _ = make_toy_gauss(seed=3)
    model = MlpModel.from_dims([2, 8, 2], seed=1)
    report = train(model, train_set, OptimizerConfig(epochs=0))
    assert model.equals(MlpModel.from_dims([2, 8, 2], seed=1))
    assert report.history == []
    assert report.final_train_accuracy is None


def test_cross_entropy_gradient():
    logits = np.array([[2.0, 0.0], [0.0, 0.0]])
    loss, grad = softmax_cross_entropy(logits, np.array([0, 1]))
    p = np.exp(2.0) / (np.exp(2.0) + 1.0)
    assert loss == pytest.approx((-np.log(p) + np.log(2.0)) / 2)
    assert np.allclose(grad, np.array([[p - 1, 1 - p], [0.5, -0.5]]) / 2)


def test_non_finite_loss_raises_divergence():
    train_set, _ = make_toy_gauss(seed=3)
    train_set.inputs[:] = np.inf
    model = MlpModel.from_dims([2, 16, 2], seed=1)
    with pytest.raises(DivergenceError) as info:
        with np.errstate(all='ignore'):
            train(model, train_set, OptimizerConfig(epochs=2))
    assert info.value.epoch == 0


def test_labels_outside_model_rejected(separable_data):
    model, data = separable_data
    data.labels[0] = 5
    with pytest.raises(ParameterError):
        train(model, data, OptimizerConfig(epochs=1))
