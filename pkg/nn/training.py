import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from nn.autodiff import backward, record
from nn.model import MlpModel, accuracy
from nn.seeding import STREAM_SHUFFLE, as_seed
from utils.errors import DivergenceError, ParameterError

logger = logging.getLogger(__name__)


@dataclass
class OptimizerConfig:
    epochs: int = 50
    batch_size: int = 32
    learning_rate: float = 0.01
    momentum: float = 0.0
    weight_decay: float = 0.0
    seed: int = 0


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    train_accuracy: float
    test_accuracy: Optional[float] = None


@dataclass
class TrainedReport:
    history: List[EpochRecord] = field(default_factory=list)

    @property
    def final_train_accuracy(self) -> Optional[float]:
        return self.history[-1].train_accuracy if self.history else None

    @property
    def final_test_accuracy(self) -> Optional[float]:
        return self.history[-1].test_accuracy if self.history else None


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray):
    """Mean cross-entropy and its gradient w.r.t. the logits"""
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=1, keepdims=True)
    n = logits.shape[0]
    log_likelihood = shifted[np.arange(n), labels] - np.log(exp.sum(axis=1))
    grad = probs.copy()
    grad[np.arange(n), labels] -= 1.0
    return float(-log_likelihood.mean()), grad / n


def train(model: MlpModel, data, opt: OptimizerConfig, test_data=None) -> TrainedReport:
    """
    Minibatch SGD with optional momentum on softmax cross-entropy.
    Updates `model` in place; shuffling is seeded per epoch.
    """
    if len(data) == 0:
        raise ParameterError("Cannot train on an empty dataset")
    if data.labels.min() < 0 or data.labels.max() >= model.output_dim:
        raise ParameterError(f"Labels must lie in [0, {model.output_dim})")

    seed = as_seed(opt.seed)
    velocities = [np.zeros_like(p) for p in model.parameters()]
    report = TrainedReport()

    for epoch in range(opt.epochs):
        order = seed.rng(STREAM_SHUFFLE, epoch).permutation(len(data))
        losses = []
        for start in range(0, len(order), opt.batch_size):
            batch = order[start:start + opt.batch_size]
            logits, tape = record(model, data.inputs[batch], batched=True)
            loss, grad_logits = softmax_cross_entropy(logits, data.labels[batch])
            if not np.isfinite(loss):
                raise DivergenceError(epoch, loss)
            losses.append(loss * len(batch))

            _, param_grads = backward(model, tape, grad_logits, want_params=True)
            grads = [g for pair in param_grads for g in pair]
            for param, velocity, grad in zip(model.parameters(), velocities, grads):
                if opt.weight_decay:
                    grad = grad + opt.weight_decay * param
                velocity *= opt.momentum
                velocity -= opt.learning_rate * grad
                param += velocity

        epoch_loss = float(np.sum(losses) / len(data))
        if not np.isfinite(epoch_loss):
            raise DivergenceError(epoch, epoch_loss)
        record_ = EpochRecord(epoch=epoch, loss=epoch_loss, train_accuracy=accuracy(model, data),
                              test_accuracy=accuracy(model, test_data) if test_data is not None and len(test_data) else None)
        report.history.append(record_)
        logger.info(f"Epoch {epoch + 1}/{opt.epochs}: loss={epoch_loss:.4f} "
                    f"train_acc={record_.train_accuracy:.4f} test_acc={record_.test_accuracy}")

    return report
