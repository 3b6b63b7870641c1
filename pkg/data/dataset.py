from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from utils.errors import DimensionError, ParameterError


@dataclass
class Dataset:
    """
    inputs: (n, d) float64, one flattened sample per row
    labels: (n,) int64
    masks: optional (n, d) uint8 ground-truth masks
    shape: per-sample shape before flattening, e.g. (12, 12)
    """
    inputs: np.ndarray
    labels: np.ndarray
    masks: Optional[np.ndarray] = None
    name: str = 'dataset'
    shape: Tuple[int, ...] = ()

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.inputs.ndim != 2:
            self.inputs = self.inputs.reshape(len(self.labels), -1)
        if not self.shape:
            self.shape = (self.inputs.shape[1],)
        if int(np.prod(self.shape)) != self.inputs.shape[1]:
            raise DimensionError(f"shape {self.shape} does not match feature count {self.inputs.shape[1]}")
        if len(self.inputs) != len(self.labels):
            raise DimensionError(f"{len(self.inputs)} inputs but {len(self.labels)} labels")
        if self.masks is not None:
            self.masks = np.asarray(self.masks, dtype=np.uint8).reshape(len(self.labels), -1)
            if self.masks.shape != self.inputs.shape:
                raise DimensionError(f"masks {self.masks.shape} do not match inputs {self.inputs.shape}")
            if np.any(self.masks > 1):
                raise ParameterError("masks must be binary")
            if len(self.masks) and np.any(self.masks.sum(axis=1) == 0):
                raise ParameterError("every mask needs at least one positive entry")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.inputs.shape[1]

    @property
    def has_masks(self) -> bool:
        return self.masks is not None

    @property
    def num_classes(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    def subset(self, indices: Sequence[int], name: Optional[str] = None) -> 'Dataset':
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(self.inputs[indices], self.labels[indices],
                       None if self.masks is None else self.masks[indices],
                       name or self.name, self.shape)
