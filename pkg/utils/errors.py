"""Exception hierarchy shared by every package of the lab."""


class GnlabError(Exception):
    """Base class for all errors raised by the lab"""


class DimensionError(GnlabError, ValueError):
    """Array shape does not match what the model or metric expects"""


class ClassIndexError(GnlabError, IndexError):
    """Requested class index is outside [0, k)"""


class ParameterError(GnlabError, ValueError):
    """Invalid numeric parameter (negative sigma, empty pool, ...)"""


class DivergenceError(GnlabError):
    """Training produced a non-finite loss"""

    def __init__(self, epoch: int, loss: float):
        super().__init__(f"Training diverged at epoch {epoch} (loss={loss})")
        self.epoch = epoch
        self.loss = loss


class FormatError(GnlabError):
    """Binary file could not be parsed"""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class DegenerateModelError(GnlabError):
    """Clean accuracy equals chance level, accuracy drop is undefined"""


class CalibrationError(GnlabError):
    """Noise calibration could not reach the requested accuracy drop"""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class UndefinedMetricError(GnlabError):
    """Metric is undefined for this input (zero variance, all-zero attribution)"""


class DegenerateTestError(GnlabError):
    """Statistical test undefined because all paired differences are zero"""


class SmallSampleError(GnlabError):
    """Too few pairs for the normal approximation"""


class OptimizationError(GnlabError):
    """Activation maximization objective became non-finite"""

    def __init__(self, step: int, value: float):
        super().__init__(f"Objective became non-finite at step {step} (value={value})")
        self.step = step
        self.value = value


class ConfigError(GnlabError):
    """Experiment configuration is invalid"""
