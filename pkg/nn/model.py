import logging
from dataclasses import dataclass
from typing import Iterator, List, Sequence

import numpy as np

from nn.seeding import STREAM_INIT, STREAM_RANDOMIZATION, STREAM_WEIGHTS, SeedSpec, as_seed
from utils.errors import DimensionError, ParameterError

logger = logging.getLogger(__name__)

ACTIVATIONS = ('relu', 'identity')


@dataclass
class DenseLayer:
    weight: np.ndarray  # (out, in)
    bias: np.ndarray    # (out,)
    activation: str = 'relu'

    @property
    def in_dim(self) -> int:
        return self.weight.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weight.shape[0]

    def copy(self) -> 'DenseLayer':
        return DenseLayer(self.weight.copy(), self.bias.copy(), self.activation)


class MlpModel:
    """Dense feed-forward network f(x; W) with ReLU hidden layers and identity logits"""

    def __init__(self, layers: Sequence[DenseLayer]):
        self.layers: List[DenseLayer] = list(layers)
        self.validate()

    def validate(self):
        if not self.layers:
            raise DimensionError("Model needs at least one layer")
        for i, layer in enumerate(self.layers):
            if layer.weight.ndim != 2 or layer.bias.shape != (layer.out_dim,):
                raise DimensionError(f"Layer {i}: weight {layer.weight.shape} and bias {layer.bias.shape} disagree")
            if layer.activation not in ACTIVATIONS:
                raise ParameterError(f"Layer {i}: unknown activation '{layer.activation}'")
            if i > 0 and self.layers[i - 1].out_dim != layer.in_dim:
                raise DimensionError(
                    f"Layer {i - 1} outputs {self.layers[i - 1].out_dim} but layer {i} expects {layer.in_dim}")
        if self.layers[-1].activation != 'identity':
            raise ParameterError("Final layer must produce logits (identity activation)")

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def dims(self) -> List[int]:
        return [self.input_dim] + [layer.out_dim for layer in self.layers]

    @classmethod
    def from_dims(cls, dims: Sequence[int], seed=None) -> 'MlpModel':
        """He-normal weights, zero biases"""
        if len(dims) < 2:
            raise DimensionError("dims needs input and output sizes")
        rng = as_seed(seed).rng(STREAM_INIT)
        layers = []
        for i, (n_in, n_out) in enumerate(zip(dims[:-1], dims[1:])):
            weight = rng.normal(0.0, np.sqrt(2.0 / n_in), size=(n_out, n_in))
            activation = 'identity' if i == len(dims) - 2 else 'relu'
            layers.append(DenseLayer(weight, np.zeros(n_out), activation))
        return cls(layers)

    def clone(self) -> 'MlpModel':
        return MlpModel([layer.copy() for layer in self.layers])

    def randomized(self, std: float = 0.05, seed=None) -> 'MlpModel':
        """Same architecture, every weight and bias redrawn from N(0, std^2)"""
        rng = as_seed(seed).rng(STREAM_RANDOMIZATION)
        layers = [DenseLayer(rng.normal(0.0, std, layer.weight.shape),
                             rng.normal(0.0, std, layer.bias.shape),
                             layer.activation) for layer in self.layers]
        return MlpModel(layers)

    def parameters(self) -> Iterator[np.ndarray]:
        for layer in self.layers:
            yield layer.weight
            yield layer.bias

    def equals(self, other: 'MlpModel') -> bool:
        """Bitwise parameter equality"""
        if len(self.layers) != len(other.layers):
            return False
        return all(a.shape == b.shape and a.tobytes() == b.tobytes()
                   for a, b in zip(self.parameters(), other.parameters())) and \
            all(a.activation == b.activation for a, b in zip(self.layers, other.layers))

    def __repr__(self):
        return f"MlpModel(dims={self.dims})"


def _activate(z: np.ndarray, activation: str) -> np.ndarray:
    if activation == 'relu':
        return np.maximum(z, 0.0)
    return z


def _check_input(model: MlpModel, x: np.ndarray, batched: bool) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    expected_ndim = 2 if batched else 1
    if x.ndim != expected_ndim or x.shape[-1] != model.input_dim:
        raise DimensionError(f"Expected input of shape {'(n, ' if batched else '('}{model.input_dim}), got {x.shape}")
    return x


def forward(model: MlpModel, x: np.ndarray) -> np.ndarray:
    """Logits f(x; W) for a single input vector"""
    a = _check_input(model, x, batched=False)
    for layer in model.layers:
        a = _activate(a @ layer.weight.T + layer.bias, layer.activation)
    return a


def forward_batch(model: MlpModel, inputs: np.ndarray) -> np.ndarray:
    """Logits for every row of `inputs`"""
    a = _check_input(model, inputs, batched=True)
    for layer in model.layers:
        a = _activate(a @ layer.weight.T + layer.bias, layer.activation)
    return a


def perturb_weights(model: MlpModel, sigma_ng: float, seed: SeedSpec, perturb_bias: bool = True) -> MlpModel:
    """
    W_i = W * eta_i, eta_i ~ N(1, sigma_ng^2) entrywise, drawn from the seed's
    weight stream. The source model is left untouched.
    """
    if sigma_ng < 0:
        raise ParameterError(f"sigma_ng must be non-negative, got {sigma_ng}")
    rng = as_seed(seed).rng(STREAM_WEIGHTS)
    layers = []
    for layer in model.layers:
        weight = layer.weight * rng.normal(1.0, sigma_ng, layer.weight.shape)
        # bias noise is drawn even when unused
        bias_noise = rng.normal(1.0, sigma_ng, layer.bias.shape)
        bias = layer.bias * bias_noise if perturb_bias else layer.bias.copy()
        layers.append(DenseLayer(weight, bias, layer.activation))
    return MlpModel(layers)


def predict(model: MlpModel, inputs: np.ndarray) -> np.ndarray:
    """argmax of the logits; ties go to the lowest class index"""
    return np.argmax(forward_batch(model, inputs), axis=1)


def accuracy(model: MlpModel, data) -> float:
    """Fraction of samples whose argmax logit equals the label"""
    if len(data) == 0:
        raise ParameterError("accuracy needs a non-empty dataset")
    return float(np.mean(predict(model, data.inputs) == data.labels))
