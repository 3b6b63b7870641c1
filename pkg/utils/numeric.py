import numpy as np
from typing import Iterable


def running_mean(values: Iterable[np.ndarray]):
    """
    Incremental mean m_k = m_{k-1} + (v_k - m_{k-1}) / k.

    A sequence of identical values returns that value bitwise, which the
    sigma = 0 reductions of the enhancers rely on.
    """
    mean = None
    count = 0
    for value in values:
        count += 1
        if mean is None:
            mean = np.array(value, dtype=np.float64, copy=True)
        else:
            mean = mean + (value - mean) / count
    if mean is None:
        raise ValueError("running_mean of an empty sequence")
    return mean


def running_mean_scalar(values: Iterable[float]) -> float:
    return float(running_mean(np.float64(v) for v in values))
