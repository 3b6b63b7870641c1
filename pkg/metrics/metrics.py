"""
Attribution quality metrics.

    localization   relevance_rank_accuracy   higher is better
    faithfulness   faithfulness_corr         higher is better
    robustness     max_sensitivity           lower is better
    sparseness     gini_index                higher is better
    auc            ranking_auc               higher is better
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Union

import numpy as np
from scipy.stats import pearsonr, rankdata

from explainers.attribution import Attribution
from nn.model import MlpModel, forward_batch
from nn.seeding import STREAM_FAITHFULNESS, STREAM_SENSITIVITY, as_seed
from metrics.statistics import spearman_rank_correlation
from utils.errors import DimensionError, ParameterError, UndefinedMetricError
from utils.numeric import running_mean_scalar

logger = logging.getLogger(__name__)

AttributionLike = Union[Attribution, np.ndarray]
ExplainFn = Callable[[MlpModel, np.ndarray, int], AttributionLike]

RANDOMIZATION_STD = 0.05


def as_vector(attr: AttributionLike) -> np.ndarray:
    """Flat float64 view; Attributions contribute their post-abs values"""
    values = attr.values if isinstance(attr, Attribution) else attr
    return np.asarray(values, dtype=np.float64).ravel()


def _as_mask(mask, size: int) -> np.ndarray:
    mask = np.asarray(mask).ravel().astype(bool)
    if mask.size != size:
        raise DimensionError(f"mask has {mask.size} entries, attribution {size}")
    return mask


@dataclass
class FaithfulnessConfig:
    subset_size: int = 32
    iterations: int = 100
    baseline_value: float = 0.0
    correlation: str = 'pearson'

    def validate(self, dim: int):
        if not 1 <= self.subset_size <= dim:
            raise ParameterError(f"subset_size must lie in [1, {dim}], got {self.subset_size}")
        if self.iterations < 2:
            raise ParameterError("faithfulness needs at least 2 iterations")
        if self.correlation != 'pearson':
            raise ParameterError(f"Unsupported correlation '{self.correlation}'")


def relevance_rank_accuracy(attr: AttributionLike, mask) -> float:
    """Share of the top-K attributed features inside the mask, K = mask size"""
    values = as_vector(attr)
    mask = _as_mask(mask, values.size)
    k = int(mask.sum())
    if k == 0:
        raise UndefinedMetricError("relevance rank accuracy needs a non-empty mask")
    # stable sort: ties at the K-th value go to the lowest flat index
    top_k = np.argsort(-values, kind='stable')[:k]
    return float(mask[top_k].sum()) / k


def faithfulness_corr(model: MlpModel, x: np.ndarray, class_index: int, attr: AttributionLike,
                      cfg: Optional[FaithfulnessConfig] = None, seed=None) -> float:
    """
    Pearson correlation between sum_{i in S} attr_i and f_c(x) - f_c(x with S
    set to the baseline), over random subsets S drawn without replacement.
    """
    cfg = cfg or FaithfulnessConfig()
    x = np.asarray(x, dtype=np.float64).ravel()
    values = as_vector(attr)
    if values.size != x.size:
        raise DimensionError(f"attribution has {values.size} entries, input {x.size}")
    cfg.validate(x.size)
    seed = as_seed(seed)

    subsets = [seed.rng(STREAM_FAITHFULNESS, it).choice(x.size, cfg.subset_size, replace=False)
               for it in range(cfg.iterations)]
    batch = np.repeat(x[None, :], cfg.iterations + 1, axis=0)
    for row, subset in enumerate(subsets, start=1):
        batch[row, subset] = cfg.baseline_value
    scores = forward_batch(model, batch)[:, class_index]

    sums = np.array([values[subset].sum() for subset in subsets])
    drops = scores[0] - scores[1:]
    if np.ptp(sums) == 0 or np.ptp(drops) == 0:
        raise UndefinedMetricError("faithfulness correlation undefined: zero variance series")
    return float(np.clip(pearsonr(sums, drops)[0], -1.0, 1.0))


def max_sensitivity(explain_fn: ExplainFn, model: MlpModel, x: np.ndarray, class_index: int,
                    radius: float = 0.2, n: int = 10, seed=None) -> float:
    """Largest Frobenius change of the explanation over n uniform draws from the L-inf ball"""
    if radius <= 0:
        raise ParameterError(f"radius must be positive, got {radius}")
    if n < 1:
        raise ParameterError("max_sensitivity needs at least one draw")
    x = np.asarray(x, dtype=np.float64)
    seed = as_seed(seed)
    reference = as_vector(explain_fn(model, x, class_index))

    worst = 0.0
    for i in range(n):
        delta = seed.rng(STREAM_SENSITIVITY, i).uniform(-radius, radius, x.shape)
        moved = as_vector(explain_fn(model, x + delta, class_index))
        worst = max(worst, float(np.linalg.norm(moved - reference)))
    return worst


def gini_index(attr: AttributionLike) -> float:
    """sum_i (2i - n - 1) e_i / (n sum_i e_i) over the ascending |attr|"""
    e = np.sort(np.abs(as_vector(attr)))
    total = e.sum()
    if total == 0:
        raise UndefinedMetricError("Gini index of an all-zero attribution")
    n = e.size
    i = np.arange(1, n + 1)
    return float(np.sum((2 * i - n - 1) * e) / (n * total))


def ranking_auc(attr: AttributionLike, mask) -> float:
    """ROC AUC with mask membership as the positive class (rank-sum form, midranks)"""
    values = as_vector(attr)
    mask = _as_mask(mask, values.size)
    n_pos = int(mask.sum())
    n_neg = mask.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("ranking AUC needs both mask and non-mask features")
    ranks = rankdata(values)
    return float((ranks[mask].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def d_auc(auc: float, auc_baseline: float) -> float:
    if auc_baseline <= 0:
        raise ParameterError("baseline AUC must be positive")
    return auc / auc_baseline - 1.0


def sanity_scores(model: MlpModel, explain_fn: ExplainFn, data_subset, seed=None,
                  std: float = RANDOMIZATION_STD) -> List[float]:
    """
    Spearman correlation between explanations of the trained model and of a
    fully re-initialised copy, one value per sample (explaining its label).
    Samples whose explanation is constant are skipped with a warning.
    """
    if len(data_subset) == 0:
        raise ParameterError("sanity check needs a non-empty subset")
    randomized = model.randomized(std, seed)
    scores = []
    for index in range(len(data_subset)):
        x = data_subset.inputs[index]
        c = int(data_subset.labels[index])
        try:
            scores.append(spearman_rank_correlation(as_vector(explain_fn(model, x, c)),
                                                    as_vector(explain_fn(randomized, x, c))))
        except UndefinedMetricError:
            logger.warning(f"Sanity check: sample {index} has a constant explanation, excluded")
    return scores


def sanity_mean(scores: List[float]) -> float:
    """Mean of per-sample sanity scores; an empty list means every sample was excluded"""
    if not scores:
        raise UndefinedMetricError("every sample in the sanity check was excluded")
    return running_mean_scalar(scores)


def sanity_randomization(model: MlpModel, explain_fn: ExplainFn, data_subset, seed=None) -> float:
    return sanity_mean(sanity_scores(model, explain_fn, data_subset, seed))
