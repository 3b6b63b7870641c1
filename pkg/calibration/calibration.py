"""
Noise-level selection.

SmoothGrad uses the range rule sigma_SG = alpha * (max(x) - min(x)).
NoiseGrad and FusionGrad are tuned until the relative accuracy drop

    AD(sigma) = 1 - (ACC(sigma) - ACC(inf)) / (ACC(0) - ACC(inf))

reaches a target (5% by default), where ACC(inf) = 1/k is the chance level
of a balanced k-class problem.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
import pandas as pd

from data.dataset import Dataset
from nn.model import MlpModel, accuracy, perturb_weights, predict
from nn.seeding import STREAM_CALIBRATION, STREAM_CALIBRATION_INPUT, as_seed
from utils.errors import CalibrationError, DegenerateModelError, ParameterError
from utils.numeric import running_mean_scalar
from utils.parallel import ordered_map

logger = logging.getLogger(__name__)

GRID_MIN = 1e-3
GRID_MAX = 2.0
GRID_POINTS = 12
MAX_EVALUATIONS = 25
DEFAULT_REPEATS = 10


@dataclass
class TracePoint:
    sigma: float
    acc: float
    drop: float
    clamped: bool = False   # ACC(sigma) exceeded ACC(0), drop forced to 0


@dataclass
class CalibrationResult:
    sigma: float
    achieved_drop: float
    acc_at_sigma: float
    acc_clean: float
    chance_level: float
    search_trace: List[TracePoint] = field(default_factory=list)

    @property
    def evaluations(self) -> int:
        return len(self.search_trace)


@dataclass
class FusionCalibration:
    sigma_sg: float
    sigma_ng: float
    mode: str
    ng_result: Optional[CalibrationResult] = None

    def as_tuple(self) -> Tuple[float, float]:
        return self.sigma_sg, self.sigma_ng


def sigma_sg_rule(x_reference, alpha_sg: float) -> float:
    """alpha * (max - min), over the whole dataset when given one"""
    if alpha_sg < 0:
        raise ParameterError(f"alpha_sg must be non-negative, got {alpha_sg}")
    values = x_reference.inputs if isinstance(x_reference, Dataset) else np.asarray(x_reference, dtype=np.float64)
    if values.size == 0:
        raise ParameterError("sigma_sg_rule needs a non-empty reference")
    return float(alpha_sg * (values.max() - values.min()))


def chance_level(model: MlpModel) -> float:
    return 1.0 / model.output_dim


def drop_from_accuracy(acc_sigma: float, acc_clean: float, chance: float) -> Tuple[float, bool]:
    """AD for one accuracy reading, clamped at 0; returns (drop, clamped)"""
    if acc_clean == chance:
        raise DegenerateModelError(f"clean accuracy {acc_clean:.4f} equals chance level {chance:.4f}")
    drop = 1.0 - (acc_sigma - chance) / (acc_clean - chance)
    if drop < 0:
        return 0.0, True
    return float(drop), False


def accuracy_under_noise(model: MlpModel, data: Dataset, sigma_ng: float, sigma_sg: float = 0.0,
                         repeats: int = DEFAULT_REPEATS, seed=None, threads: int = 1) -> float:
    """
    Mean accuracy of `repeats` perturbed models (child seeds (CALIBRATION, r)).
    With sigma_sg > 0 every input also gets fresh Gaussian noise, which gives
    the joint accuracy used to calibrate FusionGrad.
    """
    if repeats < 1:
        raise ParameterError("repeats must be at least 1")
    if sigma_ng == 0 and sigma_sg == 0:
        return accuracy(model, data)
    seed = as_seed(seed)

    def one(r):
        model_r = perturb_weights(model, sigma_ng, seed.child(STREAM_CALIBRATION, r))
        if sigma_sg == 0:
            return accuracy(model_r, data)
        noise = seed.rng(STREAM_CALIBRATION_INPUT, r).standard_normal(data.inputs.shape)
        return float(np.mean(predict(model_r, data.inputs + sigma_sg * noise) == data.labels))

    return running_mean_scalar(ordered_map(one, range(repeats), threads))


def accuracy_drop(model: MlpModel, data: Dataset, sigma_ng: float, repeats: int = DEFAULT_REPEATS,
                  seed=None, sigma_sg: float = 0.0) -> float:
    acc_clean = accuracy(model, data)
    chance = chance_level(model)
    if sigma_ng == 0 and sigma_sg == 0:
        drop_from_accuracy(acc_clean, acc_clean, chance)
        return 0.0
    acc_sigma = accuracy_under_noise(model, data, sigma_ng, sigma_sg, repeats, seed)
    return drop_from_accuracy(acc_sigma, acc_clean, chance)[0]


def calibrate_ng(model: MlpModel, data: Dataset, target_drop: float = 0.05, tol: float = 0.01, seed=None,
                 repeats: int = DEFAULT_REPEATS, accuracy_fn: Optional[Callable[[float], float]] = None,
                 sigma_sg: float = 0.0, threads: int = 1) -> CalibrationResult:
    """
    Log-spaced grid over [1e-3, 2] to bracket the target, then bisection on
    log(sigma) (geometric midpoints).
    Stops at the first evaluated sigma within tol, or after 25 evaluations
    with the closest sigma found. `accuracy_fn(sigma)` replaces the Monte-Carlo
    accuracy estimate when given.
    """
    if not 0 <= target_drop < 1:
        raise ParameterError(f"target_drop must lie in [0, 1), got {target_drop}")
    if tol <= 0:
        raise ParameterError("tol must be positive")

    acc_clean = accuracy(model, data)
    chance = chance_level(model)
    if acc_clean == chance:
        raise DegenerateModelError(f"clean accuracy {acc_clean:.4f} equals chance level {chance:.4f}")

    if accuracy_fn is None:
        def accuracy_fn(sigma):
            return accuracy_under_noise(model, data, sigma, sigma_sg, repeats, seed, threads)

    trace: List[TracePoint] = []

    def evaluate(sigma: float) -> TracePoint:
        acc = float(accuracy_fn(sigma))
        drop, clamped = drop_from_accuracy(acc, acc_clean, chance)
        point = TracePoint(float(sigma), acc, drop, clamped)
        trace.append(point)
        logger.info(f"Calibration step {len(trace)}: sigma={sigma:.5f} acc={acc:.4f} drop={drop:.4f}"
                    + (" (clamped)" if clamped else ""))
        return point

    def result(point: TracePoint) -> CalibrationResult:
        return CalibrationResult(sigma=point.sigma, achieved_drop=point.drop, acc_at_sigma=point.acc,
                                 acc_clean=acc_clean, chance_level=chance, search_trace=trace)

    def closest() -> TracePoint:
        return min(trace, key=lambda p: abs(p.drop - target_drop))

    lower: Optional[TracePoint] = None
    upper: Optional[TracePoint] = None
    for sigma in np.geomspace(GRID_MIN, GRID_MAX, GRID_POINTS):
        point = evaluate(sigma)
        if abs(point.drop - target_drop) <= tol:
            return result(point)
        if point.drop < target_drop:
            lower = point
        else:
            upper = point
            break

    if upper is None or lower is None:
        raise CalibrationError(f"target drop {target_drop} not bracketed on [{GRID_MIN}, {GRID_MAX}]", trace)

    while len(trace) < MAX_EVALUATIONS:
        point = evaluate(float(np.sqrt(lower.sigma * upper.sigma)))
        if abs(point.drop - target_drop) <= tol:
            return result(point)
        if point.drop < target_drop:
            lower = point
        else:
            upper = point

    best = closest()
    logger.warning(f"Calibration stopped after {MAX_EVALUATIONS} evaluations; "
                   f"best sigma={best.sigma:.5f} drop={best.drop:.4f}")
    return result(best)


def calibrate_fg(model: MlpModel, data: Dataset, target_drop: float = 0.05, tol: float = 0.01, seed=None,
                 mode: str = 'appendix', alpha_sg: float = 0.1, solo_values: Optional[Tuple[float, float]] = None,
                 repeats: int = DEFAULT_REPEATS, threads: int = 1) -> FusionCalibration:
    """
    'appendix': sigma_SG from the range rule at alpha_sg, then sigma_NG tuned
    on the joint drop with both noises active.
    'halve': each method's solo value, halved. `solo_values` (sigma_sg, sigma_ng)
    skips the solo searches; otherwise sigma_SG uses alpha 0.2 and sigma_NG is
    calibrated alone.
    """
    if mode == 'appendix':
        sigma_sg = sigma_sg_rule(data, alpha_sg)
        ng = calibrate_ng(model, data, target_drop, tol, seed, repeats, sigma_sg=sigma_sg, threads=threads)
        logger.info(f"FusionGrad calibration (appendix): sigma_sg={sigma_sg:.5f} sigma_ng={ng.sigma:.5f}")
        return FusionCalibration(sigma_sg, ng.sigma, mode, ng)
    if mode == 'halve':
        ng = None
        if solo_values is None:
            ng = calibrate_ng(model, data, target_drop, tol, seed, repeats, threads=threads)
            solo_values = (sigma_sg_rule(data, 0.2), ng.sigma)
        sigma_sg, sigma_ng = solo_values
        logger.info(f"FusionGrad calibration (halve): sigma_sg={sigma_sg / 2:.5f} sigma_ng={sigma_ng / 2:.5f}")
        return FusionCalibration(sigma_sg / 2, sigma_ng / 2, mode, ng)
    raise ParameterError(f"Unknown FusionGrad calibration mode '{mode}'")


def trace_frame(result: CalibrationResult) -> pd.DataFrame:
    return pd.DataFrame([(p.sigma, p.acc, p.drop, p.clamped) for p in result.search_trace],
                        columns=['sigma', 'acc', 'drop', 'clamped'])


def write_trace_csv(result: CalibrationResult, path: str):
    trace_frame(result).to_csv(path, index=False, float_format='%.10g')
