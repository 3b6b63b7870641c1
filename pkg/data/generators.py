"""Procedural datasets with ground-truth explanation masks."""

import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from data.dataset import Dataset
from nn.seeding import (STREAM_DATA_POINTS, STREAM_DATA_SPLIT, STREAM_GLYPH_BACKGROUND,
                        STREAM_GLYPH_PLACEMENT, as_seed)
from utils.errors import ParameterError

logger = logging.getLogger(__name__)


@dataclass
class ToyGaussSpec:
    n_points: int = 1024
    means: Tuple[Tuple[float, float], ...] = ((8.0, 8.0), (1.0, 8.0), (8.0, 1.0), (1.0, 1.0))
    variance: float = 0.5
    test_size: int = 64

    @property
    def train_size(self) -> int:
        return self.n_points - self.test_size

    def validate(self):
        if self.variance <= 0:
            raise ParameterError(f"variance must be positive, got {self.variance}")
        if len(self.means) != 4:
            raise ParameterError("toy mixture needs exactly 4 means")
        if not 0 <= self.test_size <= self.n_points:
            raise ParameterError(f"test_size {self.test_size} outside [0, {self.n_points}]")


def make_toy_gauss(spec: ToyGaussSpec = None, seed=None) -> Tuple[Dataset, Dataset]:
    """
    Equal mixture of 4 isotropic Gaussians in R^2; the first two components
    are class 0, the last two class 1. Returns (train, test).
    """
    spec = spec or ToyGaussSpec()
    spec.validate()
    seed = as_seed(seed)
    rng = seed.rng(STREAM_DATA_POINTS)

    counts = [spec.n_points // 4 + (1 if i < spec.n_points % 4 else 0) for i in range(4)]
    components = np.repeat(np.arange(4), counts)
    means = np.asarray(spec.means, dtype=np.float64)
    points = means[components] + rng.normal(0.0, np.sqrt(spec.variance), size=(spec.n_points, 2))
    labels = (components >= 2).astype(np.int64)

    order = seed.rng(STREAM_DATA_SPLIT).permutation(spec.n_points)
    test_idx, train_idx = order[:spec.test_size], order[spec.test_size:]
    full = Dataset(points.reshape(spec.n_points, 2), labels, name='toy_gauss', shape=(2,))
    return full.subset(train_idx, 'toy_gauss_train'), full.subset(test_idx, 'toy_gauss_test')


def _glyph_templates() -> Dict[str, np.ndarray]:
    g = 5
    eye = np.eye(g)
    center = np.zeros((g, g))
    center[g // 2, :] = 1
    center[:, g // 2] = 1

    frame = np.ones((g, g))
    frame[1:-1, 1:-1] = 0

    tee = np.zeros((g, g))
    tee[0, :] = 1
    tee[:, g // 2] = 1

    ell = np.zeros((g, g))
    ell[:, 0] = 1
    ell[-1, :] = 1

    yy, xx = np.mgrid[:g, :g]
    disk = (((yy - g // 2) ** 2 + (xx - g // 2) ** 2) <= (g // 2) ** 2 + 1).astype(float)

    aitch = np.zeros((g, g))
    aitch[:, 0] = 1
    aitch[:, -1] = 1
    aitch[g // 2, :] = 1

    ee = np.zeros((g, g))
    ee[:, 0] = 1
    ee[::2, :] = 1

    return {
        'cross': center,
        'frame': frame,
        'diagonal': eye,
        'tee': tee,
        'ell': ell,
        'disk': disk,
        'antidiagonal': eye[::-1].copy(),
        'ex': np.clip(eye + eye[::-1], 0, 1),
        'aitch': aitch,
        'ee': ee,
    }


GLYPHS = _glyph_templates()
GLYPH_NAMES = list(GLYPHS)


def glyph_template(class_index: int, scale: int = 1) -> np.ndarray:
    template = GLYPHS[GLYPH_NAMES[class_index]]
    return np.kron(template, np.ones((scale, scale)))


def make_masked_glyph(n: int, side: int = 12, glyph_classes: int = 4, noise_std: float = 0.3,
                      seed=None, mask_mode: str = 'box', scale: int = 1) -> Dataset:
    """
    side x side images: N(0, noise_std^2) background clipped to [0, 1] with one
    glyph stamped at intensity 1.0 at a uniform random position. Labels are
    balanced; the mask is the glyph's bounding box ('box') or its pixels ('glyph').
    Placement and background come from separate streams, so masks never depend
    on the background draw.
    """
    if side < 8:
        raise ParameterError(f"side must be at least 8, got {side}")
    if not 2 <= glyph_classes <= len(GLYPHS):
        raise ParameterError(f"glyph_classes must lie in [2, {len(GLYPHS)}], got {glyph_classes}")
    if mask_mode not in ('box', 'glyph'):
        raise ParameterError(f"mask_mode must be 'box' or 'glyph', got {mask_mode}")
    if noise_std < 0:
        raise ParameterError("noise_std must be non-negative")
    templates = [glyph_template(c, scale) for c in range(glyph_classes)]
    glyph_size = templates[0].shape[0]
    if glyph_size > side:
        raise ParameterError(f"glyph of size {glyph_size} does not fit a {side}x{side} image")

    seed = as_seed(seed)
    placement = seed.rng(STREAM_GLYPH_PLACEMENT)
    background = seed.rng(STREAM_GLYPH_BACKGROUND)

    labels = placement.permutation(np.arange(n) % glyph_classes)
    images = np.clip(background.normal(0.0, noise_std, size=(n, side, side)), 0.0, 1.0)
    masks = np.zeros((n, side, side), dtype=np.uint8)

    for i in range(n):
        template = templates[labels[i]]
        top, left = placement.integers(0, side - glyph_size + 1, size=2)
        rows, cols = np.nonzero(template)
        images[i, top + rows, left + cols] = 1.0
        if mask_mode == 'glyph':
            masks[i, top + rows, left + cols] = 1
        else:
            masks[i, top + rows.min():top + rows.max() + 1, left + cols.min():left + cols.max() + 1] = 1

    logger.debug(f"Generated {n} glyph samples ({glyph_classes} classes, side {side}, noise {noise_std})")
    return Dataset(images.reshape(n, side * side), labels, masks.reshape(n, side * side),
                   name=f'glyph{glyph_classes}_s{side}', shape=(side, side))
