import numpy as np
import pytest

from nn.autodiff import backward, grad_input, grad_input_batch, grad_neuron, record
from nn.model import MlpModel, forward
from utils.errors import ClassIndexError, DimensionError

H = 1e-6


def central_difference(fn, x):
    grad = np.zeros_like(x)
    for i in range(len(x)):
        step = np.zeros_like(x)
        step[i] = H
        grad[i] = (fn(x + step) - fn(x - step)) / (2 * H)
    return grad


def test_grad_input_matches_finite_differences():
    rng = np.random.default_rng(0)
    for k in range(100):
        model = MlpModel.from_dims([5, 7, 6, 3], seed=k)
        for layer in model.layers:
            layer.bias[:] = rng.normal(0, 0.1, layer.out_dim)
        x = rng.normal(size=5)
        c = k % 3
        analytic = grad_input(model, x, c)
        numeric = central_difference(lambda v: forward(model, v)[c], x)
        assert np.linalg.norm(analytic - numeric) <= 1e-4 * max(np.linalg.norm(numeric), 1e-6)


def test_grad_input_batch_matches_single(tiny_model):
    inputs = np.random.default_rng(1).normal(size=(4, 6))
    batch = grad_input_batch(tiny_model, inputs, 2)
    for row, x in zip(batch, inputs):
        assert np.allclose(row, grad_input(tiny_model, x, 2), atol=1e-12)


def test_linear_model_gradient_is_weight_row(linear_model):
    x = np.array([1.0, 2.0, -1.0, 0.5])
    assert np.array_equal(grad_input(linear_model, x, 1), linear_model.layers[0].weight[1])


def test_grad_neuron_hidden_unit_matches_finite_differences(tiny_model):
    x = np.random.default_rng(2).uniform(0, 1, 6)
    value, grad = grad_neuron(tiny_model, x, 1, 3)
    z = tiny_model.layers[0].weight @ x
    a = np.maximum(tiny_model.layers[1].weight @ np.maximum(z, 0), 0)
    assert value == pytest.approx(a[3], abs=1e-12)

    def unit(v):
        return np.maximum(tiny_model.layers[1].weight @ np.maximum(tiny_model.layers[0].weight @ v, 0), 0)[3]
    assert np.allclose(grad, central_difference(unit, x), atol=1e-6)


def test_grad_neuron_negative_layer_index_is_logit(tiny_model):
    x = np.linspace(0, 1, 6)
    value, grad = grad_neuron(tiny_model, x, -1, 1)
    assert value == pytest.approx(forward(tiny_model, x)[1], abs=1e-12)
    assert np.allclose(grad, grad_input(tiny_model, x, 1), atol=1e-12)


def test_invalid_indices_raise(tiny_model):
    x = np.zeros(6)
    with pytest.raises(ClassIndexError):
        grad_input(tiny_model, x, 3)
    with pytest.raises(ClassIndexError):
        grad_neuron(tiny_model, x, 0, 8)
    with pytest.raises(DimensionError):
        grad_neuron(tiny_model, x, 5, 0)
    with pytest.raises(DimensionError):
        grad_input(tiny_model, np.zeros(4), 0)


def test_tape_cannot_be_replayed(tiny_model):
    logits, tape = record(tiny_model, np.ones(6))
    backward(tiny_model, tape, np.ones_like(logits))
    with pytest.raises(RuntimeError):
        backward(tiny_model, tape, np.ones_like(logits))
