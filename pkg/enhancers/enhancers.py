"""
SmoothGrad, NoiseGrad and FusionGrad wrappers around any base explainer.

    SG: (1/N) sum_j E(x + xi_j, f(., W))
    NG: (1/M) sum_i E(x, f(., W_i)),  W_i = W * eta_i
    FG: (1/M) sum_i (1/N) sum_j E(x + xi_j, f(., W_i))

Seeds: W_i from child (ENSEMBLE, i); xi_j from child (INPUT_NOISE, j), shared
across models, or (INPUT_NOISE, i, j) when share_input_noise is off. The base
explainer keeps one seed, child (EXPLAINER,), for every draw. Averages are
running means, inner over inputs then outer over models, so the sigma = 0
reductions hold bitwise and any thread schedule gives the serial result.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterator, List, Tuple

import numpy as np

from explainers.attribution import ENHANCERS, Attribution
from explainers.explainers import ExplainerFactory, ExplainerSpec
from nn.model import MlpModel, perturb_weights
from nn.seeding import STREAM_ENSEMBLE, STREAM_EXPLAINER, STREAM_INPUT_NOISE, SeedSpec
from utils.errors import ParameterError
from utils.numeric import running_mean
from utils.parallel import ordered_map

logger = logging.getLogger(__name__)

AVERAGING_MODES = ('post_abs', 'pre_abs')


@dataclass
class EnhancerConfig:
    sigma_sg: float = 0.0
    sigma_ng: float = 0.0
    n_inputs: int = 10
    m_models: int = 10
    base_seed: int = 0
    share_input_noise: bool = True
    average: str = 'post_abs'
    perturb_bias: bool = True
    memory_bounded: bool = False
    threads: int = 1

    def validate(self):
        if self.sigma_sg < 0 or self.sigma_ng < 0:
            raise ParameterError("noise levels must be non-negative")
        if self.n_inputs < 1 or self.m_models < 1:
            raise ParameterError("n_inputs and m_models must be at least 1")
        if self.average not in AVERAGING_MODES:
            raise ParameterError(f"average must be one of {AVERAGING_MODES}")

    @property
    def seed(self) -> SeedSpec:
        return SeedSpec(self.base_seed)

    def snapshot(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def noisegrad_high_quality(cls, sigma_ng: float, base_seed: int = 0) -> 'EnhancerConfig':
        """NG alone with a larger ensemble"""
        return cls(sigma_ng=sigma_ng, m_models=25, base_seed=base_seed)


def explainer_seed(cfg: EnhancerConfig) -> SeedSpec:
    return cfg.seed.child(STREAM_EXPLAINER)


def ensemble_stream(model: MlpModel, cfg: EnhancerConfig) -> Iterator[MlpModel]:
    """The M perturbed models of cfg, lazily when memory_bounded, otherwise materialised first"""
    seeds = [cfg.seed.child(STREAM_ENSEMBLE, i) for i in range(cfg.m_models)]
    if cfg.memory_bounded:
        return (perturb_weights(model, cfg.sigma_ng, s, cfg.perturb_bias) for s in seeds)
    return iter([perturb_weights(model, cfg.sigma_ng, s, cfg.perturb_bias) for s in seeds])


def noisy_input(x: np.ndarray, cfg: EnhancerConfig, model_index: int, input_index: int) -> np.ndarray:
    if cfg.sigma_sg == 0:
        return x
    index = (input_index,) if cfg.share_input_noise else (model_index, input_index)
    rng = cfg.seed.rng(STREAM_INPUT_NOISE, *index)
    return x + cfg.sigma_sg * rng.standard_normal(x.shape)


def _layout(enhancer: str, cfg: EnhancerConfig) -> Tuple[bool, bool, int]:
    """(perturb models?, perturb inputs?, inputs per model)"""
    if enhancer not in ENHANCERS:
        raise ParameterError(f"Unknown enhancer '{enhancer}', expected one of {ENHANCERS}")
    return {
        'none': (False, False, 1),
        'sg': (False, True, cfg.n_inputs),
        'ng': (True, False, 1),
        'fg': (True, True, cfg.n_inputs),
    }[enhancer]


def _explain_row(explainer, model_i: MlpModel, i: int, add_noise: bool, n_inputs: int,
                 x, class_index, cfg) -> List[Attribution]:
    seed = explainer_seed(cfg)

    def one(j):
        x_ij = noisy_input(x, cfg, i, j) if add_noise else x
        return explainer.explain(model_i, x_ij, class_index, seed)

    return ordered_map(one, range(n_inputs), cfg.threads)


def _models(model: MlpModel, perturb: bool, cfg: EnhancerConfig) -> Iterator[MlpModel]:
    return ensemble_stream(model, cfg) if perturb else iter([model])


def _rows(model, x, class_index, explainer: ExplainerSpec, cfg: EnhancerConfig,
          enhancer: str) -> Iterator[List[Attribution]]:
    cfg.validate()
    base = ExplainerFactory.get_explainer(explainer)
    perturb, add_noise, n_inputs = _layout(enhancer, cfg)
    models = _models(model, perturb, cfg)

    if n_inputs == 1 and perturb and not cfg.memory_bounded:
        # one input per model: parallelise across the ensemble instead
        return iter(ordered_map(lambda item: _explain_row(base, item[1], item[0], add_noise, 1, x, class_index, cfg),
                                list(enumerate(models)), cfg.threads))
    return (_explain_row(base, model_i, i, add_noise, n_inputs, x, class_index, cfg)
            for i, model_i in enumerate(models))


def sample_explanations(model: MlpModel, x: np.ndarray, class_index: int, explainer: ExplainerSpec,
                        cfg: EnhancerConfig, enhancer: str) -> List[List[Attribution]]:
    """Every per-draw explanation, indexed [model i][input j]"""
    x = np.asarray(x, dtype=np.float64)
    return list(_rows(model, x, class_index, explainer, cfg, enhancer))


def enhance(model: MlpModel, x: np.ndarray, class_index: int, explainer: ExplainerSpec,
            cfg: EnhancerConfig, enhancer: str) -> Attribution:
    """Run one enhancer ('none', 'sg', 'ng', 'fg') around the base explainer"""
    x = np.asarray(x, dtype=np.float64)
    row_means = [(running_mean(a.values for a in row), running_mean(a.raw for a in row))
                 for row in _rows(model, x, class_index, explainer, cfg, enhancer)]
    values = running_mean(v for v, _ in row_means)
    raw = running_mean(r for _, r in row_means)
    if cfg.average == 'pre_abs':
        values = np.abs(raw)

    logger.debug(f"{enhancer} x {explainer.method}: sigma_sg={cfg.sigma_sg} sigma_ng={cfg.sigma_ng} "
                 f"rows={len(row_means)}")
    return Attribution(values=values, raw=raw, method=explainer.method, enhancer=enhancer,
                       config_snapshot=cfg.snapshot(), seed_used=cfg.base_seed,
                       shape=tuple(explainer.input_shape or x.shape))


def smoothgrad(model, x, class_index, explainer: ExplainerSpec, cfg: EnhancerConfig) -> Attribution:
    return enhance(model, x, class_index, explainer, cfg, 'sg')


def noisegrad(model, x, class_index, explainer: ExplainerSpec, cfg: EnhancerConfig) -> Attribution:
    return enhance(model, x, class_index, explainer, cfg, 'ng')


def fusiongrad(model, x, class_index, explainer: ExplainerSpec, cfg: EnhancerConfig) -> Attribution:
    return enhance(model, x, class_index, explainer, cfg, 'fg')
