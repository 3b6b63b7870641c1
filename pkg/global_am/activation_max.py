"""
Activation maximisation with an optional NoiseGrad ensemble objective.

    J(x) = (1/M) sum_i g(x, W_i) - l2_penalty * ||x||^2

g is one unit of the network (a hidden neuron or a class logit). The M
perturbed models are drawn once before the ascent unless resample_per_step
is set. Each step: x <- clip(x + step_size * grad J(x) + jitter, box).
"""

import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd

from nn.autodiff import grad_neuron
from nn.model import MlpModel, perturb_weights
from nn.seeding import STREAM_AM_JITTER, STREAM_AM_START, STREAM_ENSEMBLE, as_seed
from utils.errors import OptimizationError, ParameterError
from utils.numeric import running_mean, running_mean_scalar
from utils.parallel import ordered_map

logger = logging.getLogger(__name__)


@dataclass
class AmConfig:
    target_layer: int = -1              # -1 is the logit layer
    neuron: int = 0
    steps: int = 512
    step_size: float = 0.05
    box: Tuple[float, float] = (0.0, 1.0)
    l2_penalty: float = 1e-3
    jitter_std: float = 0.01
    m_models: int = 1
    sigma_ng: float = 0.0
    seed: int = 0
    resample_per_step: bool = False
    threads: int = 1

    def validate(self):
        if self.steps < 1:
            raise ParameterError("steps must be at least 1")
        if not self.box[0] < self.box[1]:
            raise ParameterError(f"box lower bound must be below upper bound, got {self.box}")
        if self.m_models < 1:
            raise ParameterError("m_models must be at least 1")
        if self.sigma_ng < 0 or self.jitter_std < 0 or self.l2_penalty < 0:
            raise ParameterError("sigma_ng, jitter_std and l2_penalty must be non-negative")


@dataclass
class AmResult:
    x_star: np.ndarray
    objective_trace: List[float] = field(default_factory=list)

    def as_tuple(self) -> Tuple[np.ndarray, List[float]]:
        return self.x_star, self.objective_trace


def _draw_models(model: MlpModel, cfg: AmConfig, *prefix: int) -> List[MlpModel]:
    seed = as_seed(cfg.seed)
    return [perturb_weights(model, cfg.sigma_ng, seed.child(STREAM_ENSEMBLE, *prefix, i))
            for i in range(cfg.m_models)]


def _evaluate(models: Sequence[MlpModel], x: np.ndarray, cfg: AmConfig) -> Tuple[float, np.ndarray]:
    """J(x) and its gradient"""
    pairs = ordered_map(lambda m: grad_neuron(m, x, cfg.target_layer, cfg.neuron), models, cfg.threads)
    value = running_mean_scalar(v for v, _ in pairs) - cfg.l2_penalty * float(x @ x)
    grad = running_mean(g for _, g in pairs) - 2.0 * cfg.l2_penalty * x
    return value, grad


def ensemble_objective(models: Sequence[MlpModel], x: np.ndarray, cfg: AmConfig) -> float:
    return _evaluate(models, np.asarray(x, dtype=np.float64), cfg)[0]


def _ascend(model: MlpModel, models: List[MlpModel], cfg: AmConfig, resample: bool = False) -> AmResult:
    cfg.validate()
    seed = as_seed(cfg.seed)
    lo, hi = cfg.box
    x = seed.rng(STREAM_AM_START).uniform(lo, hi, model.input_dim)
    value, grad = _evaluate(models, x, cfg)
    trace = []

    for step in range(cfg.steps):
        x = x + cfg.step_size * grad
        if cfg.jitter_std:
            x = x + seed.rng(STREAM_AM_JITTER, step).normal(0.0, cfg.jitter_std, x.shape)
        x = np.clip(x, lo, hi)
        if resample:
            models = _draw_models(model, cfg, step + 1)
        value, grad = _evaluate(models, x, cfg)
        if not np.isfinite(value):
            raise OptimizationError(step, value)
        trace.append(value)
        if (step + 1) % 128 == 0:
            logger.debug(f"AM step {step + 1}/{cfg.steps}: J={value:.6f}")

    logger.info(f"Activation maximisation finished: M={len(models)} sigma_ng={cfg.sigma_ng} J={trace[-1]:.6f}")
    return AmResult(x, trace)


def activation_maximize(model: MlpModel, cfg: AmConfig) -> AmResult:
    """Ascent on the ensemble-averaged objective; M=1 and sigma_ng=0 is plain AM"""
    cfg.validate()
    return _ascend(model, _draw_models(model, cfg), cfg, cfg.resample_per_step)


def plain_activation_maximize(model: MlpModel, cfg: AmConfig) -> AmResult:
    """Ascent on the unperturbed model alone"""
    return _ascend(model, [model], cfg)


def objective_frame(result: AmResult) -> pd.DataFrame:
    return pd.DataFrame({'step': np.arange(1, len(result.objective_trace) + 1),
                         'objective': result.objective_trace})


def write_objective_csv(result: AmResult, path: str):
    objective_frame(result).to_csv(path, index=False, float_format='%.10g')
