#!/usr/bin/env python3
"""
Demo script for the NoiseGrad explanation lab
Trains the 2-D toy model and compares the four enhancers at one test point
"""

import os
import sys

import numpy as np

# Add project root to path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from calibration.calibration import accuracy_drop, sigma_sg_rule
from data.generators import make_toy_gauss
from enhancers.enhancers import EnhancerConfig, enhance
from explainers.explainers import ExplainerSpec
from nn.model import MlpModel, accuracy, forward_batch
from nn.training import OptimizerConfig, train


def demo_training():
    """Train the toy classifier"""
    print("\n" + "="*60)
    print("TOY MODEL TRAINING DEMO")
    print("="*60)

    train_set, test_set = make_toy_gauss(seed=0)
    model = MlpModel.from_dims([2, 16, 16, 2], seed=0)
    train(model, train_set, OptimizerConfig(epochs=50, learning_rate=0.01, momentum=0.5, seed=0))
    print(f"Test accuracy: {accuracy(model, test_set):.3f}")
    return model, train_set, test_set


def demo_enhancers(model, train_set, test_set):
    """Explain the test point nearest the decision boundary with every enhancer"""
    print("\n" + "="*60)
    print("ENHANCER COMPARISON DEMO")
    print("="*60)

    logits = forward_batch(model, test_set.inputs)
    margins = np.abs(logits[:, 0] - logits[:, 1])
    index = int(np.argmin(margins))
    x, label = test_set.inputs[index], int(test_set.labels[index])

    sigma_sg = sigma_sg_rule(train_set, 0.2)
    sigma_ng = 0.5
    print(f"Point {x.round(3).tolist()} (label {label}), sigma_sg={sigma_sg:.3f}, sigma_ng={sigma_ng}")
    print(f"Accuracy drop at sigma_ng: {accuracy_drop(model, test_set, sigma_ng, seed=0):.3f}")

    spec = ExplainerSpec('saliency')
    configs = {
        'none': EnhancerConfig(),
        'sg': EnhancerConfig(sigma_sg=sigma_sg),
        'ng': EnhancerConfig(sigma_ng=sigma_ng),
        'fg': EnhancerConfig(sigma_sg=sigma_sg / 2, sigma_ng=sigma_ng / 2),
    }
    for enhancer, cfg in configs.items():
        attr = enhance(model, x, label, spec, cfg, enhancer)
        print(f"  {enhancer:>4}: gradient {attr.raw.round(4).tolist()}")


if __name__ == "__main__":
    print("NoiseGrad Explanation Lab - Demo")
    model, train_set, test_set = demo_training()
    demo_enhancers(model, train_set, test_set)
