"""Reverse-mode differentiation through a recorded forward pass."""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from nn.model import MlpModel, _activate, _check_input
from utils.errors import ClassIndexError, DimensionError


@dataclass
class GradTape:
    """Forward intermediates of exactly one pass: layer inputs and pre-activations"""
    layer_inputs: List[np.ndarray] = field(default_factory=list)
    pre_activations: List[np.ndarray] = field(default_factory=list)
    consumed: bool = False


def record(model: MlpModel, x: np.ndarray, batched: bool = False,
           upto_layer: Optional[int] = None) -> Tuple[np.ndarray, GradTape]:
    """Run the forward pass (optionally stopping after `upto_layer`) and keep the tape"""
    a = _check_input(model, x, batched=batched)
    last = len(model.layers) - 1 if upto_layer is None else upto_layer
    tape = GradTape()
    for layer in model.layers[:last + 1]:
        tape.layer_inputs.append(a)
        z = a @ layer.weight.T + layer.bias
        tape.pre_activations.append(z)
        a = _activate(z, layer.activation)
    return a, tape


def backward(model: MlpModel, tape: GradTape, grad_output: np.ndarray,
             want_params: bool = False):
    """
    Propagate d(objective)/d(output of the last taped layer) back to the input.
    ReLU'(0) is taken as 0. With want_params the per-layer (dW, db) are returned too.
    """
    if tape.consumed:
        raise RuntimeError("GradTape already replayed")
    tape.consumed = True
    g = grad_output
    param_grads = []
    for index in range(len(tape.pre_activations) - 1, -1, -1):
        layer = model.layers[index]
        z = tape.pre_activations[index]
        if layer.activation == 'relu':
            g = g * (z > 0)
        if want_params:
            a_in = tape.layer_inputs[index]
            if g.ndim == 1:
                param_grads.append((np.outer(g, a_in), g.copy()))
            else:
                param_grads.append((g.T @ a_in, g.sum(axis=0)))
        g = g @ layer.weight
    if want_params:
        return g, param_grads[::-1]
    return g


def check_class_index(model: MlpModel, class_index: int):
    if not 0 <= class_index < model.output_dim:
        raise ClassIndexError(f"class_index {class_index} outside [0, {model.output_dim})")


def grad_input(model: MlpModel, x: np.ndarray, class_index: int) -> np.ndarray:
    """d f_c / d x"""
    check_class_index(model, class_index)
    logits, tape = record(model, x)
    seed = np.zeros_like(logits)
    seed[class_index] = 1.0
    return backward(model, tape, seed)


def grad_input_batch(model: MlpModel, inputs: np.ndarray, class_index: int) -> np.ndarray:
    """Row-wise d f_c / d x for a batch of inputs"""
    check_class_index(model, class_index)
    logits, tape = record(model, inputs, batched=True)
    seed = np.zeros_like(logits)
    seed[:, class_index] = 1.0
    return backward(model, tape, seed)


def grad_neuron(model: MlpModel, x: np.ndarray, layer_index: int, neuron: int) -> Tuple[float, np.ndarray]:
    """Value and input-gradient of one unit's post-activation at `layer_index`"""
    n_layers = len(model.layers)
    if layer_index < 0:
        layer_index += n_layers
    if not 0 <= layer_index < n_layers:
        raise DimensionError(f"layer_index outside [0, {n_layers})")
    out_dim = model.layers[layer_index].out_dim
    if not 0 <= neuron < out_dim:
        raise ClassIndexError(f"neuron {neuron} outside [0, {out_dim})")
    activation, tape = record(model, x, upto_layer=layer_index)
    seed = np.zeros_like(activation)
    seed[neuron] = 1.0
    return float(activation[neuron]), backward(model, tape, seed)
