"""
Deterministic seed derivation.

child_seed = SeedSequence(entropy=base_seed, spawn_key=(stream_id, *index))
The same (base_seed, stream_id, index) always yields the same child, so any
parallel schedule reproduces the serial result.
"""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from utils.errors import ParameterError

# Stream ids. Never renumber: archived runs depend on them.
STREAM_WEIGHTS = 1
STREAM_INPUT_NOISE = 2
STREAM_SHUFFLE = 3
STREAM_INIT = 4
STREAM_ENSEMBLE = 5
STREAM_EXPLAINER = 6
STREAM_GRADSHAP = 7
STREAM_FAITHFULNESS = 8
STREAM_SENSITIVITY = 9
STREAM_RANDOMIZATION = 10
STREAM_CALIBRATION = 11
STREAM_CALIBRATION_INPUT = 12
STREAM_AM_JITTER = 13
STREAM_AM_START = 14
STREAM_DATA_SPLIT = 15
STREAM_DATA_POINTS = 16
STREAM_GLYPH_PLACEMENT = 17
STREAM_GLYPH_BACKGROUND = 18
STREAM_SAMPLE_CHOICE = 19
STREAM_SAMPLE = 20

_MAX_SEED = 2 ** 64


@dataclass(frozen=True)
class SeedSpec:
    base_seed: int = 0

    def __post_init__(self):
        if not 0 <= int(self.base_seed) < _MAX_SEED:
            raise ParameterError(f"base_seed must be a 64-bit unsigned integer, got {self.base_seed}")

    def _sequence(self, stream_id: int, index) -> np.random.SeedSequence:
        return np.random.SeedSequence(entropy=int(self.base_seed),
                                      spawn_key=(int(stream_id),) + tuple(int(i) for i in index))

    def child_seed(self, stream_id: int, *index: int) -> int:
        return int(self._sequence(stream_id, index).generate_state(1, dtype=np.uint64)[0])

    def child(self, stream_id: int, *index: int) -> 'SeedSpec':
        return SeedSpec(self.child_seed(stream_id, *index))

    def rng(self, stream_id: int, *index: int) -> np.random.Generator:
        return np.random.default_rng(self._sequence(stream_id, index))


def as_seed(seed: Optional[Union[int, SeedSpec]]) -> SeedSpec:
    if seed is None:
        return SeedSpec(0)
    if isinstance(seed, SeedSpec):
        return seed
    return SeedSpec(int(seed))
