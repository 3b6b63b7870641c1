import numpy as np
import pytest

from nn.checkpoint import load_checkpoint, save_checkpoint
from nn.model import DenseLayer, MlpModel, accuracy, forward, forward_batch, perturb_weights, predict
from nn.seeding import STREAM_ENSEMBLE, SeedSpec
from data.dataset import Dataset
from utils.errors import DimensionError, FormatError, ParameterError


def test_forward_matches_manual_computation(tiny_model):
    x = np.linspace(-1, 1, 6)
    a = x
    for layer in tiny_model.layers:
        z = layer.weight @ a + layer.bias
        a = np.maximum(z, 0) if layer.activation == 'relu' else z
    assert np.allclose(forward(tiny_model, x), a, atol=1e-12)


def test_forward_batch_matches_rows(tiny_model):
    inputs = np.random.default_rng(0).normal(size=(5, 6))
    batch = forward_batch(tiny_model, inputs)
    for row, x in zip(batch, inputs):
        assert np.allclose(row, forward(tiny_model, x), atol=1e-12)


def test_wrong_input_dimension_raises(tiny_model):
    with pytest.raises(DimensionError):
        forward(tiny_model, np.zeros(5))
    with pytest.raises(DimensionError):
        forward_batch(tiny_model, np.zeros(6))


def test_mismatched_layers_rejected():
    with pytest.raises(DimensionError):
        MlpModel([DenseLayer(np.ones((3, 2)), np.zeros(3)), DenseLayer(np.ones((2, 4)), np.zeros(2), 'identity')])


def test_final_layer_must_be_identity():
    with pytest.raises(ParameterError):
        MlpModel([DenseLayer(np.ones((2, 2)), np.zeros(2), 'relu')])


def test_from_dims_is_deterministic():
    a = MlpModel.from_dims([4, 8, 3], seed=3)
    b = MlpModel.from_dims([4, 8, 3], seed=3)
    assert a.equals(b)
    assert a.dims == [4, 8, 3]
    assert [layer.activation for layer in a.layers] == ['relu', 'identity']
    assert not a.equals(MlpModel.from_dims([4, 8, 3], seed=4))


def test_perturb_weights_zero_sigma_is_bitwise_identity(tiny_model):
    perturbed = perturb_weights(tiny_model, 0.0, SeedSpec(1))
    assert perturbed.equals(tiny_model)
    assert perturbed is not tiny_model


def test_perturb_weights_is_multiplicative_and_leaves_source(tiny_model):
    before = tiny_model.clone()
    perturbed = perturb_weights(tiny_model, 0.2, SeedSpec(1))
    assert tiny_model.equals(before)
    assert not perturbed.equals(tiny_model)
    # zero entries stay zero under multiplicative noise
    for layer, noisy in zip(tiny_model.layers, perturbed.layers):
        assert np.all(noisy.bias[layer.bias == 0] == 0)
    assert perturb_weights(tiny_model, 0.2, SeedSpec(1)).equals(perturbed)


def test_perturb_bias_flag_keeps_bias(tiny_model):
    model = tiny_model.clone()
    for layer in model.layers:
        layer.bias[:] = 0.5
    perturbed = perturb_weights(model, 0.3, SeedSpec(2), perturb_bias=False)
    for layer in perturbed.layers:
        assert np.all(layer.bias == 0.5)
    with_bias = perturb_weights(model, 0.3, SeedSpec(2), perturb_bias=True)
    # weight draws do not depend on the bias flag
    for a, b in zip(perturbed.layers, with_bias.layers):
        assert np.array_equal(a.weight, b.weight)


def test_negative_sigma_rejected(tiny_model):
    with pytest.raises(ParameterError):
        perturb_weights(tiny_model, -0.1, SeedSpec(0))


def test_randomized_keeps_architecture(tiny_model):
    randomized = tiny_model.randomized(0.05, seed=1)
    assert randomized.dims == tiny_model.dims
    weights = np.concatenate([layer.weight.ravel() for layer in randomized.layers])
    assert abs(weights.std() - 0.05) < 0.02


def test_predict_and_accuracy(separable_data):
    model, data = separable_data
    assert np.array_equal(predict(model, data.inputs), data.labels)
    assert accuracy(model, data) == 1.0
    with pytest.raises(ParameterError):
        accuracy(model, Dataset(np.zeros((0, 3)), np.zeros(0)))


def test_checkpoint_round_trip(tmp_path, tiny_model):
    path = str(tmp_path / 'model.mlp')
    save_checkpoint(tiny_model, path)
    assert load_checkpoint(path).equals(tiny_model)


def test_checkpoint_truncated_or_padded_raises(tmp_path, tiny_model):
    path = tmp_path / 'model.mlp'
    save_checkpoint(tiny_model, str(path))
    data = path.read_bytes()

    path.write_bytes(data[:-8])
    with pytest.raises(FormatError):
        load_checkpoint(str(path))

    path.write_bytes(data + b'\x00')
    with pytest.raises(FormatError):
        load_checkpoint(str(path))

    path.write_bytes(b'NOT-A-MODEL\n' + data)
    with pytest.raises(FormatError):
        load_checkpoint(str(path))


def naive_forward(model, x):
    a = list(x)
    for layer in model.layers:
        out = []
        for r in range(layer.out_dim):
            z = layer.bias[r]
            for c in range(layer.in_dim):
                z += layer.weight[r, c] * a[c]
            out.append(max(z, 0.0) if layer.activation == 'relu' else z)
        a = out
    return np.array(a)


def test_forward_matches_loop_implementation():
    rng = np.random.default_rng(9)
    for k in range(20):
        model = MlpModel.from_dims([7, 9, 6, 4], seed=k)
        for layer in model.layers:
            layer.bias[:] = rng.normal(0, 0.2, layer.out_dim)
        x = rng.normal(size=7)
        assert np.allclose(forward(model, x), naive_forward(model, x), rtol=0, atol=1e-12)


def test_perturb_weights_moments(linear_model):
    sigma, draws = 0.2, 10000
    seed = SeedSpec(7)
    samples = np.array([perturb_weights(linear_model, sigma, seed.child(STREAM_ENSEMBLE, i)).layers[0].weight
                        for i in range(draws)])
    w = linear_model.layers[0].weight
    # one scalar weight, w = 2.0
    entry = samples[:, 0, 2]
    assert abs(entry.mean() - w[0, 2]) < 3 * sigma * abs(w[0, 2]) / np.sqrt(draws)
    assert np.allclose(samples.std(axis=0), sigma * np.abs(w), rtol=0.05, atol=0)
