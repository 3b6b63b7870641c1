import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from explainers.attribution import METHODS, Attribution
from nn.autodiff import check_class_index, grad_input, grad_input_batch, record
from nn.model import MlpModel, forward_batch
from nn.seeding import STREAM_GRADSHAP, as_seed
from utils.errors import DimensionError, ParameterError
from utils.numeric import running_mean

logger = logging.getLogger(__name__)

LRP_EPSILON = 1e-9


@dataclass
class ExplainerSpec:
    method: str = 'saliency'
    ig_steps: int = 128
    ig_baseline: Optional[np.ndarray] = None          # defaults to zeros
    shap_samples: int = 16
    shap_baseline_pool: Optional[np.ndarray] = None   # (p, d); without training data, a single zero baseline
    shap_sigma: Optional[float] = None                # defaults to 0.1 * (max(x) - min(x))
    occlusion_patch: int = 2
    occlusion_fill: float = 0.0
    gamma: float = 0.25
    input_shape: Optional[Tuple[int, ...]] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    def validate(self):
        if self.method not in METHODS:
            raise ParameterError(f"Unknown explanation method '{self.method}', expected one of {METHODS}")
        if self.ig_steps < 1:
            raise ParameterError("ig_steps must be at least 1")
        if self.gamma < 0:
            raise ParameterError("gamma must be non-negative")
        if self.shap_samples < 1:
            raise ParameterError("shap_samples must be at least 1")

    def snapshot(self) -> Dict[str, Any]:
        """JSON-friendly parameters (arrays reduced to their shape)"""
        out = {}
        for key, value in asdict(self).items():
            if isinstance(value, np.ndarray):
                out[key] = f"array{list(value.shape)}"
            elif isinstance(value, tuple):
                out[key] = list(value)
            else:
                out[key] = value
        return out


class BaseExplainer:
    """Base class for all attribution methods E(x, f(., W))"""

    method = ''

    def __init__(self, spec: ExplainerSpec):
        spec.validate()
        self.spec = spec

    def attribute(self, model: MlpModel, x: np.ndarray, class_index: int, seed=None) -> np.ndarray:
        """Signed (pre-abs) relevances"""
        raise NotImplementedError

    def explain(self, model: MlpModel, x: np.ndarray, class_index: int, seed=None) -> Attribution:
        x = np.asarray(x, dtype=np.float64)
        check_class_index(model, class_index)
        raw = self.attribute(model, x, class_index, seed)
        return Attribution(values=np.abs(raw), raw=raw, method=self.method,
                           seed_used=None if seed is None else as_seed(seed).base_seed,
                           shape=tuple(self.spec.input_shape or x.shape))


class SaliencyExplainer(BaseExplainer):
    """Gradient of the class logit w.r.t. the input"""

    method = 'saliency'

    def attribute(self, model, x, class_index, seed=None):
        return grad_input(model, x, class_index)


class IntegratedGradientsExplainer(BaseExplainer):
    """(x - x_bar) times the midpoint-rule average of gradients along the straight path"""

    method = 'intgrad'

    def attribute(self, model, x, class_index, seed=None):
        baseline = _baseline(self.spec.ig_baseline, x)
        steps = self.spec.ig_steps
        alphas = (np.arange(steps) + 0.5) / steps
        path = baseline[None, :] + alphas[:, None] * (x - baseline)[None, :]
        grads = grad_input_batch(model, path, class_index)
        return (x - baseline) * grads.mean(axis=0)


class GradientShapExplainer(BaseExplainer):
    """
    Expected gradient times (x - x_bar_j) at random points between a pool
    baseline and x, with Gaussian jitter. Draw j uses child stream (GRADSHAP, j).
    """

    method = 'gradshap'

    def attribute(self, model, x, class_index, seed=None):
        pool = self.spec.shap_baseline_pool
        pool = np.zeros((1, x.size)) if pool is None else np.asarray(pool, dtype=np.float64).reshape(-1, x.size)
        if len(pool) == 0:
            raise ParameterError("GradientSHAP baseline pool is empty")
        sigma = self.spec.shap_sigma
        if sigma is None:
            sigma = 0.1 * float(x.max() - x.min())
        seed = as_seed(seed)

        def term(j):
            rng = seed.rng(STREAM_GRADSHAP, j)
            baseline = pool[rng.integers(len(pool))]
            u = rng.uniform()
            eps = rng.normal(0.0, sigma, x.shape)
            point = baseline + u * (x - baseline) + eps
            return (x - baseline) * grad_input(model, point, class_index)

        return running_mean(term(j) for j in range(self.spec.shap_samples))


class OcclusionExplainer(BaseExplainer):
    """Score drop f_c(x) - f_c(x with patch set to fill), shared by every feature in the patch"""

    method = 'occlusion'

    def attribute(self, model, x, class_index, seed=None):
        patch = self.spec.occlusion_patch
        if patch < 1:
            raise ParameterError("occlusion patch size must be at least 1")
        shape = tuple(self.spec.input_shape or x.shape)
        patches = occlusion_patches(shape, patch)

        batch = np.repeat(x[None, :], len(patches) + 1, axis=0)
        for row, idx in enumerate(patches, start=1):
            batch[row, idx] = self.spec.occlusion_fill
        scores = forward_batch(model, batch)[:, class_index]

        raw = np.zeros_like(x)
        for row, idx in enumerate(patches, start=1):
            raw[idx] = scores[0] - scores[row]
        return raw


class LrpGammaExplainer(BaseExplainer):
    """LRP-gamma relevance redistribution seeded with the raw class logit"""

    method = 'lrp_gamma'

    def attribute(self, model, x, class_index, seed=None):
        return lrp_layer_relevances(model, x, class_index, self.spec.gamma)[0]


def occlusion_patches(shape: Tuple[int, ...], patch: int) -> List[np.ndarray]:
    """Flat index sets: square tiles on 2-D shapes, windows on 1-D; last tiles may be ragged"""
    if len(shape) == 2:
        h, w = shape
        grid = np.arange(h * w).reshape(h, w)
        return [grid[r:r + patch, c:c + patch].ravel()
                for r in range(0, h, patch) for c in range(0, w, patch)]
    d = int(np.prod(shape))
    return [np.arange(start, min(start + patch, d)) for start in range(0, d, patch)]


def lrp_layer_relevances(model: MlpModel, x: np.ndarray, class_index: int, gamma: float) -> List[np.ndarray]:
    """
    Relevance at every layer boundary, input first. The output is seeded with
    f_c(x) at the chosen logit. Denominators include the gamma-modified bias,
    whose share is absorbed, and are stabilised by eps * sign(z).
    """
    if gamma < 0:
        raise ParameterError("gamma must be non-negative")
    logits, tape = record(model, x)
    relevance = np.zeros_like(logits)
    relevance[class_index] = logits[class_index]
    relevances = [relevance]

    for index in range(len(model.layers) - 1, -1, -1):
        layer = model.layers[index]
        a_in = tape.layer_inputs[index]
        weight = layer.weight + gamma * np.maximum(layer.weight, 0.0)
        bias = layer.bias + gamma * np.maximum(layer.bias, 0.0)
        z = a_in @ weight.T + bias
        z = z + LRP_EPSILON * np.where(z >= 0, 1.0, -1.0)
        relevance = a_in * ((relevance / z) @ weight)
        relevances.append(relevance)

    return relevances[::-1]


def _baseline(baseline: Optional[np.ndarray], x: np.ndarray) -> np.ndarray:
    if baseline is None:
        return np.zeros_like(x)
    baseline = np.asarray(baseline, dtype=np.float64).reshape(-1)
    if baseline.shape != x.shape:
        raise DimensionError(f"baseline shape {baseline.shape} does not match input {x.shape}")
    return baseline


class ExplainerFactory:
    """Factory to get the appropriate explainer for a method name"""

    _explainers = {
        'saliency': SaliencyExplainer,
        'intgrad': IntegratedGradientsExplainer,
        'gradshap': GradientShapExplainer,
        'occlusion': OcclusionExplainer,
        'lrp_gamma': LrpGammaExplainer,
    }

    @classmethod
    def get_explainer(cls, spec: ExplainerSpec) -> BaseExplainer:
        explainer_class = cls._explainers.get(spec.method)
        if explainer_class is None:
            raise ParameterError(f"Unknown explanation method '{spec.method}'")
        return explainer_class(spec)

    @classmethod
    def get_supported_methods(cls) -> List[str]:
        return list(cls._explainers.keys())


def explain(model: MlpModel, x: np.ndarray, class_index: int, spec: ExplainerSpec, seed=None) -> Attribution:
    return ExplainerFactory.get_explainer(spec).explain(model, x, class_index, seed)


def saliency(model, x, class_index) -> Attribution:
    return explain(model, x, class_index, ExplainerSpec('saliency'))


def intgrad(model, x, class_index, spec: ExplainerSpec = None) -> Attribution:
    spec = replace(spec or ExplainerSpec(), method="intgrad")
    return explain(model, x, class_index, spec)


def gradshap(model, x, class_index, spec: ExplainerSpec = None, seed=None) -> Attribution:
    spec = replace(spec or ExplainerSpec(), method="gradshap")
    return explain(model, x, class_index, spec, seed)


def occlusion(model, x, class_index, spec: ExplainerSpec = None) -> Attribution:
    spec = replace(spec or ExplainerSpec(), method="occlusion")
    return explain(model, x, class_index, spec)


def lrp_gamma(model, x, class_index, gamma: float = 0.25) -> Attribution:
    return explain(model, x, class_index, ExplainerSpec('lrp_gamma', gamma=gamma))
